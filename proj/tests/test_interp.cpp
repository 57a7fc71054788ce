#include <cmath>

#include <doctest.h>

#include "crosc/error.hpp"
#include "crosc/interp.hpp"

using namespace crosc;

namespace {

double cubic(double x) { return 0.3 - 1.2 * x + 0.7 * x * x - 0.25 * x * x * x; }

double interpolate(const SplineAxis& axis, const std::vector<double>& y, double x) {
  const Eigen::VectorXd w = axis.weights(x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w(static_cast<Eigen::Index>(i)) * y[i];
  return s;
}

}  // namespace

TEST_SUITE("interp") {
  TEST_CASE("not-a-knot spline reproduces cubics on uneven nodes") {
    const std::vector<double> x{-1.0, -0.6, 0.1, 0.3, 0.9, 1.4, 2.0};
    std::vector<double> y;
    for (double v : x) y.push_back(cubic(v));
    const SplineAxis axis(x);
    for (double q = -1.0; q <= 2.0; q += 0.0371) CHECK(interpolate(axis, y, q) == doctest::Approx(cubic(q)).epsilon(1e-12));
  }

  TEST_CASE("weights are a partition of unity and interpolate node values") {
    const SplineAxis axis({0.0, 1.0, 2.5, 3.0, 4.0});
    for (double q : {0.0, 0.4, 2.5, 3.7, 4.0}) CHECK(axis.weights(q).sum() == doctest::Approx(1.0).epsilon(1e-14));
    const Eigen::VectorXd w = axis.weights(2.5);
    CHECK(w(2) == doctest::Approx(1.0));
    CHECK(w.cwiseAbs().sum() == doctest::Approx(1.0));
  }

  TEST_CASE("fourth-order convergence on a smooth function") {
    auto err = [](int n) {
      std::vector<double> x, y;
      for (int i = 0; i < n; ++i) {
        x.push_back(2.0 * i / (n - 1));
        y.push_back(std::sin(3.0 * x.back()));
      }
      const SplineAxis axis(x);
      double e = 0.0;
      for (double q = 0.0; q <= 2.0; q += 0.001) e = std::max(e, std::abs(interpolate(axis, y, q) - std::sin(3.0 * q)));
      return e;
    };
    const double ratio = err(21) / err(41);
    CHECK(ratio > 12.0);
    CHECK(ratio < 24.0);
  }

  TEST_CASE("short axes fall back to polynomial interpolation") {
    const SplineAxis one({2.0});
    CHECK(one.weights(2.0)(0) == 1.0);
    CHECK_THROWS_AS(one.weights(2.1), InvalidInput);
    const SplineAxis two({0.0, 2.0});
    CHECK(interpolate(two, {1.0, 5.0}, 0.5) == doctest::Approx(2.0));
    const SplineAxis three({0.0, 1.0, 3.0});
    auto q = [](double v) { return 1.0 + v - 2.0 * v * v; };
    CHECK(interpolate(three, {q(0), q(1), q(3)}, 2.2) == doctest::Approx(q(2.2)));
  }

  TEST_CASE("no extrapolation and strictly increasing nodes") {
    const SplineAxis axis({0.0, 1.0, 2.0, 3.0});
    CHECK_FALSE(axis.contains(3.0000001));
    CHECK_THROWS_AS(axis.weights(-0.1), InvalidInput);
    CHECK_THROWS_AS(SplineAxis({0.0, 1.0, 1.0, 2.0}), InvalidInput);
    CHECK_THROWS_AS(SplineAxis(std::vector<double>{}), InvalidInput);
  }

  TEST_CASE("tensor-product grid reproduces bicubic data") {
    const std::vector<double> x{0.0, 0.5, 1.0, 1.5, 2.0}, y{-1.0, 0.0, 0.5, 1.0};
    auto f = [](double a, double b) { return cubic(a) * (1.0 + b - b * b * b) + a * b; };
    Eigen::MatrixXd c0(5, 4), c1(5, 4);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 4; ++j) {
        c0(i, j) = f(x[i], y[j]);
        c1(i, j) = 2.0;
      }
    const GridInterpolator g(x, y, {c0, c1});
    CHECK(g.channels() == 2);
    const Eigen::VectorXd v = g(1.23, 0.37);
    CHECK(v(0) == doctest::Approx(f(1.23, 0.37)).epsilon(1e-12));
    CHECK(v(1) == doctest::Approx(2.0));
    CHECK_THROWS_AS(GridInterpolator(x, y, {Eigen::MatrixXd::Zero(4, 4)}), InvalidInput);
  }
}
