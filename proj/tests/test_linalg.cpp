#include <random>

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "crosc/error.hpp"
#include "crosc/linalg.hpp"

using namespace crosc;
using linalg::cd;

namespace {

Eigen::MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = {g(rng), g(rng)};
  return m;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("banded LU agrees with a dense full-pivot solve") {
    std::mt19937 rng(7);
    const Eigen::Index n = 90, half = 4;
    Eigen::MatrixXcd a = random_complex(n, n, rng);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (std::abs(i - j) > half) a(i, j) = 0.0;
    a.diagonal().array() += 3.0;
    const Eigen::MatrixXcd b = random_complex(n, 3, rng);
    const linalg::LuSolver lu(a);
    CHECK(lu.banded());
    const Eigen::MatrixXcd x = lu.solve(b);
    const Eigen::MatrixXcd ref = a.fullPivLu().solve(b);
    CHECK((x - ref).norm() / ref.norm() < 1e-12);
    CHECK(lu.pivot_ratio() > 0.0);
    CHECK(lu.pivot_ratio() <= 1.0);
  }

  TEST_CASE("dense LU fallback for wide bands") {
    std::mt19937 rng(8);
    const Eigen::MatrixXcd a = random_complex(30, 30, rng);
    const Eigen::MatrixXcd b = random_complex(30, 2, rng);
    const linalg::LuSolver lu(a);
    CHECK_FALSE(lu.banded());
    CHECK((a * lu.solve(b) - b).norm() < 1e-11 * b.norm());
  }

  TEST_CASE("exactly singular factorization throws") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(40, 40);
    a(17, 17) = 0.0;
    CHECK_THROWS_AS(linalg::LuSolver{a}, NumericalError);
  }

  TEST_CASE("bandwidth of a block-tridiagonal pattern") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(12, 12);
    for (int i = 0; i < 12; ++i) a(i, i) = 1.0;
    a(5, 2) = 1.0;
    a(1, 4) = 2.0;
    const auto bw = linalg::bandwidth(a);
    CHECK(bw.lower == 3);
    CHECK(bw.upper == 3);
  }

  TEST_CASE("eigh_lowest matches an independent symmetric solver at n = 400") {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    const int n = 400;
    Eigen::MatrixXd a(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i) a(i, j) = a(j, i) = g(rng);
    const auto es = linalg::eigh_lowest(a, 12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
    for (int k = 0; k < 12; ++k) {
      CHECK(es.values(k) == doctest::Approx(ref.eigenvalues()(k)).epsilon(1e-10));
      const Eigen::VectorXd v = es.vectors.col(k);
      CHECK((a * v - es.values(k) * v).norm() < 1e-9);
      CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    const Eigen::MatrixXd gram = es.vectors.transpose() * es.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("general eigensolver residual and inverse") {
    std::mt19937 rng(4);
    const Eigen::MatrixXcd a = random_complex(50, 50, rng);
    const auto es = linalg::eig_general(a);
    for (Eigen::Index k = 0; k < 50; ++k) {
      CHECK((a * es.vectors.col(k) - es.values(k) * es.vectors.col(k)).norm() < 1e-11 * a.norm());
    }
    const Eigen::MatrixXcd inv = linalg::inverse(a);
    CHECK((inv * a - Eigen::MatrixXcd::Identity(50, 50)).norm() < 1e-11);
    const Eigen::VectorXcd vals = linalg::eigvals_general(a);
    for (Eigen::Index k = 0; k < 50; ++k) CHECK(std::abs(vals(k) - es.values(k)) < 1e-10);
  }

  TEST_CASE("sqrtm2 squares back, including the near-degenerate branch") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::Matrix2cd a = random_complex(2, 2, rng);
      a += 3.0 * Eigen::Matrix2cd::Identity();
      const Eigen::Matrix2cd r = linalg::sqrtm2(a);
      CHECK((r * r - a).norm() < 1e-12 * a.norm());
    }
    Eigen::Matrix2cd near;
    near << cd{1.0, 0.1}, cd{1e-10, 0.0}, cd{0.0, 0.0}, cd{1.0, 0.1};
    const Eigen::Matrix2cd r = linalg::sqrtm2(near);
    CHECK((r * r - near).norm() < 1e-14);
    Eigen::Matrix2cd cut;
    cut << -1.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(linalg::sqrtm2(cut), NumericalError);
  }

  TEST_CASE("expm2 matches the Pade exponential") {
    std::mt19937 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Matrix2cd a = random_complex(2, 2, rng);
      const Eigen::Matrix2cd ref = a.exp();
      CHECK((linalg::expm2(a) - ref).norm() < 1e-12 * ref.norm());
    }
    const Eigen::Matrix2cd zero = Eigen::Matrix2cd::Zero();
    CHECK((linalg::expm2(zero) - Eigen::Matrix2cd::Identity()).norm() < 1e-15);
  }
}
