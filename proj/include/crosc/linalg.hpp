#pragma once

#include <complex>
#include <variant>

#include <Eigen/Dense>

namespace crosc::linalg {

using cd = std::complex<double>;

/// Right eigenvectors (columns) and eigenvalues of a general complex matrix.
struct ComplexEigen {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
};

/// Dense non-Hermitian eigensolve (LAPACK zgeev).
ComplexEigen eig_general(const Eigen::MatrixXcd& a);

/// Eigenvalues only.
Eigen::VectorXcd eigvals_general(const Eigen::MatrixXcd& a);

/// Dense inverse (LAPACK zgetrf/zgetri).
Eigen::MatrixXcd inverse(const Eigen::MatrixXcd& a);

/// The `count` lowest eigenpairs of a real symmetric matrix, unit-norm real vectors.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
SymmetricEigen eigh_lowest(const Eigen::MatrixXd& a, Eigen::Index count);

/// Lower/upper bandwidth of the nonzero pattern of a square matrix.
struct Bandwidth {
  Eigen::Index lower = 0;
  Eigen::Index upper = 0;
};
Bandwidth bandwidth(const Eigen::MatrixXcd& a);

/// LU factorization with partial pivoting of a square complex matrix. Uses the
/// banded LAPACK path (zgbtrf) when the band is narrow, otherwise a dense
/// factorization. Throws NumericalError when a pivot vanishes exactly.
class LuSolver {
 public:
  explicit LuSolver(const Eigen::MatrixXcd& a);

  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const;
  Eigen::Index size() const { return n_; }
  bool banded() const { return std::holds_alternative<Banded>(storage_); }
  /// min |U_ii| / max |U_ii|
  double pivot_ratio() const { return pivot_ratio_; }

 private:
  struct Banded {
    Eigen::MatrixXcd ab;
    Eigen::VectorXi ipiv;
    int kl = 0;
    int ku = 0;
  };
  struct Dense {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  };

  Eigen::Index n_ = 0;
  double pivot_ratio_ = 1.0;
  std::variant<std::monostate, Banded, Dense> storage_;
};

/// Principal square root of a 2x2 complex matrix. Throws NumericalError if an
/// eigenvalue lies on the closed negative real axis (branch cut).
Eigen::Matrix2cd sqrtm2(const Eigen::Matrix2cd& a);

/// exp(a) for a 2x2 complex matrix, closed form.
Eigen::Matrix2cd expm2(const Eigen::Matrix2cd& a);

}  // namespace crosc::linalg
