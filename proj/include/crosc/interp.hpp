#pragma once

#include <vector>

#include <Eigen/Dense>

namespace crosc {

/// Interpolation weights along one axis of a regular grid: not-a-knot cubic
/// spline for >= 4 nodes, the interpolating parabola / line for 3 / 2 nodes.
/// A spline value is linear in the node data, so weights(x) . y = S(x).
class SplineAxis {
 public:
  explicit SplineAxis(std::vector<double> nodes);

  const std::vector<double>& nodes() const { return nodes_; }
  bool contains(double x) const;
  /// Throws InvalidInput outside [nodes.front(), nodes.back()].
  Eigen::VectorXd weights(double x) const;

 private:
  std::vector<double> nodes_;
  Eigen::MatrixXd second_;  // node values -> second derivatives
};

/// Tensor-product interpolation of several channels sampled on an
/// (x, y) grid. values[c](i, j) belongs to (x_i, y_j).
class GridInterpolator {
 public:
  GridInterpolator(std::vector<double> x, std::vector<double> y, std::vector<Eigen::MatrixXd> channels);

  Eigen::VectorXd operator()(double x, double y) const;
  std::size_t channels() const { return channels_.size(); }
  const SplineAxis& x_axis() const { return x_; }
  const SplineAxis& y_axis() const { return y_; }

 private:
  SplineAxis x_;
  SplineAxis y_;
  std::vector<Eigen::MatrixXd> channels_;
};

}  // namespace crosc
