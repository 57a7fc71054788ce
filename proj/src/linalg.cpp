#include "crosc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <lapacke.h>

#include "crosc/error.hpp"

namespace crosc::linalg {

namespace {

lapack_complex_double* as_lapack(cd* p) { return reinterpret_cast<lapack_complex_double*>(p); }
const lapack_complex_double* as_lapack(const cd* p) {
  return reinterpret_cast<const lapack_complex_double*>(p);
}

}  // namespace

ComplexEigen eig_general(const Eigen::MatrixXcd& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.rows() != a.cols()) throw InvalidInput("eig_general: matrix must be square");
  ComplexEigen out;
  if (n == 0) return out;
  Eigen::MatrixXcd work = a;
  out.values.resize(n);
  out.vectors.resize(n, n);
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, as_lapack(work.data()), n, as_lapack(out.values.data()),
                    nullptr, 1, as_lapack(out.vectors.data()), n);
  if (info != 0) {
    throw NumericalError("eigensolver (zgeev) did not converge, info = " + std::to_string(info));
  }
  return out;
}

Eigen::VectorXcd eigvals_general(const Eigen::MatrixXcd& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXcd values(n);
  if (n == 0) return values;
  Eigen::MatrixXcd work = a;
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, as_lapack(work.data()), n,
                                        as_lapack(values.data()), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw NumericalError("eigensolver (zgeev) did not converge, info = " + std::to_string(info));
  }
  return values;
}

Eigen::MatrixXcd inverse(const Eigen::MatrixXcd& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.rows() != a.cols()) throw InvalidInput("inverse: matrix must be square");
  Eigen::MatrixXcd inv = a;
  if (n == 0) return inv;
  Eigen::VectorXi ipiv(n);
  lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, as_lapack(inv.data()), n, ipiv.data());
  if (info > 0) throw NumericalError("inverse: matrix is exactly singular");
  if (info == 0) info = LAPACKE_zgetri(LAPACK_COL_MAJOR, n, as_lapack(inv.data()), n, ipiv.data());
  if (info != 0) throw NumericalError("inverse: zgetrf/zgetri failed, info = " + std::to_string(info));
  return inv;
}

SymmetricEigen eigh_lowest(const Eigen::MatrixXd& a, Eigen::Index count) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (count < 1 || count > a.rows()) throw InvalidInput("eigh_lowest: invalid eigenpair count");
  // Routed through the complex Hermitian driver: the real-symmetric drivers of
  // some optimized BLAS builds return wrong eigenvectors on AVX-512 hosts.
  Eigen::MatrixXcd work = a.cast<cd>();
  Eigen::VectorXd w(n);
  Eigen::MatrixXcd z(n, count);
  Eigen::VectorXi isuppz(2 * count);
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, as_lapack(work.data()), n, 0.0, 0.0, 1,
                     static_cast<lapack_int>(count), 0.0, &found, w.data(), as_lapack(z.data()), n, isuppz.data());
  if (info != 0 || found != count) {
    throw NumericalError("symmetric eigensolver (zheevr) failed, info = " + std::to_string(info));
  }
  SymmetricEigen out{w.head(count), Eigen::MatrixXd(n, count)};
  for (Eigen::Index j = 0; j < count; ++j) {
    // Eigenvectors of a real matrix are real up to a global phase.
    Eigen::Index big = 0;
    z.col(j).cwiseAbs().maxCoeff(&big);
    const cd phase = std::conj(z(big, j)) / std::abs(z(big, j));
    out.vectors.col(j) = (z.col(j) * phase).real();
    out.vectors.col(j).normalize();
  }
  return out;
}

Bandwidth bandwidth(const Eigen::MatrixXcd& a) {
  Bandwidth bw;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) == cd{0.0, 0.0}) continue;
      if (i > j) bw.lower = std::max(bw.lower, i - j);
      if (j > i) bw.upper = std::max(bw.upper, j - i);
    }
  }
  return bw;
}

LuSolver::LuSolver(const Eigen::MatrixXcd& a) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw InvalidInput("LuSolver: matrix must be square");
  if (n_ == 0) throw InvalidInput("LuSolver: empty matrix");
  const Bandwidth bw = bandwidth(a);
  Eigen::VectorXd udiag(n_);

  if ((bw.lower + bw.upper + 1) * 3 <= n_) {
    Banded b;
    b.kl = static_cast<int>(bw.lower);
    b.ku = static_cast<int>(bw.upper);
    const int ldab = 2 * b.kl + b.ku + 1;
    b.ab = Eigen::MatrixXcd::Zero(ldab, n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Eigen::Index i0 = std::max<Eigen::Index>(0, j - b.ku);
      const Eigen::Index i1 = std::min<Eigen::Index>(n_ - 1, j + b.kl);
      for (Eigen::Index i = i0; i <= i1; ++i) b.ab(b.kl + b.ku + i - j, j) = a(i, j);
    }
    b.ipiv.resize(n_);
    const lapack_int info =
        LAPACKE_zgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_), static_cast<lapack_int>(n_), b.kl, b.ku,
                       as_lapack(b.ab.data()), ldab, b.ipiv.data());
    if (info < 0) throw NumericalError("zgbtrf: invalid argument " + std::to_string(-info));
    if (info > 0) {
      throw NumericalError("LU factorization is exactly singular at pivot " + std::to_string(info));
    }
    for (Eigen::Index j = 0; j < n_; ++j) udiag(j) = std::abs(b.ab(b.kl + b.ku, j));
    storage_ = std::move(b);
  } else {
    Dense d{Eigen::PartialPivLU<Eigen::MatrixXcd>(a)};
    udiag = d.lu.matrixLU().diagonal().cwiseAbs();
    if (udiag.minCoeff() == 0.0) throw NumericalError("LU factorization is exactly singular");
    storage_ = std::move(d);
  }
  pivot_ratio_ = udiag.minCoeff() / udiag.maxCoeff();
}

Eigen::MatrixXcd LuSolver::solve(const Eigen::MatrixXcd& rhs) const {
  if (rhs.rows() != n_) throw InvalidInput("LuSolver::solve: dimension mismatch");
  if (const auto* d = std::get_if<Dense>(&storage_)) return d->lu.solve(rhs);
  const auto& b = std::get<Banded>(storage_);
  Eigen::MatrixXcd x = rhs;
  const int ldab = 2 * b.kl + b.ku + 1;
  const lapack_int info =
      LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(n_), b.kl, b.ku,
                     static_cast<lapack_int>(x.cols()), as_lapack(b.ab.data()), ldab, b.ipiv.data(),
                     as_lapack(x.data()), static_cast<lapack_int>(n_));
  if (info != 0) throw NumericalError("zgbtrs failed, info = " + std::to_string(info));
  return x;
}

Eigen::Matrix2cd sqrtm2(const Eigen::Matrix2cd& a) {
  const cd tr = a.trace();
  const cd det = a.determinant();
  const cd half_split = 0.5 * (a(0, 0) - a(1, 1));
  const cd disc = std::sqrt(half_split * half_split + a(0, 1) * a(1, 0));
  const cd mu1 = tr / 2.0 + disc;
  const cd mu2 = tr / 2.0 - disc;
  const double scale = std::max({1.0, std::abs(mu1), std::abs(mu2)});
  for (const cd mu : {mu1, mu2}) {
    if (mu.real() <= 0.0 && std::abs(mu.imag()) <= 1e-14 * scale) {
      throw NumericalError("matrix square root: eigenvalue on the branch cut (non-positive real axis)");
    }
  }
  if (std::abs(mu1 - mu2) > 1e-8 * scale) {
    Eigen::Matrix2cd v;
    // Eigenvectors of [[p, q], [r, s]] for eigenvalue mu: (q, mu - p) or (mu - s, r).
    for (int k = 0; k < 2; ++k) {
      const cd mu = k == 0 ? mu1 : mu2;
      Eigen::Vector2cd c1(a(0, 1), mu - a(0, 0));
      Eigen::Vector2cd c2(mu - a(1, 1), a(1, 0));
      v.col(k) = c1.norm() >= c2.norm() ? c1 : c2;
    }
    Eigen::Matrix2cd root = Eigen::Matrix2cd::Zero();
    root(0, 0) = std::sqrt(mu1);
    root(1, 1) = std::sqrt(mu2);
    return v * root * v.inverse();
  }
  // Near-degenerate: sqrt(A) = (A + s I) / sqrt(tr A + 2 s), s = sqrt(det A).
  const cd s = std::sqrt(det);
  const cd t = std::sqrt(tr + 2.0 * s);
  if (std::abs(t) < 1e-300) throw NumericalError("matrix square root: degenerate limit formula failed");
  return (a + s * Eigen::Matrix2cd::Identity()) / t;
}

Eigen::Matrix2cd expm2(const Eigen::Matrix2cd& a) {
  const cd mu = a.trace() / 2.0;
  const Eigen::Matrix2cd n = a - mu * Eigen::Matrix2cd::Identity();
  const cd s = std::sqrt(n(0, 0) * n(0, 0) + n(0, 1) * n(1, 0));
  const cd sinhc = std::abs(s) < 1e-8 ? cd{1.0} + s * s / 6.0 : std::sinh(s) / s;
  return std::exp(mu) * (std::cosh(s) * Eigen::Matrix2cd::Identity() + sinhc * n);
}

}  // namespace crosc::linalg
