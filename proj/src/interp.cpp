#include "crosc/interp.hpp"

#include <algorithm>

#include "crosc/error.hpp"

namespace crosc {

SplineAxis::SplineAxis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  if (n == 0) throw InvalidInput("interpolation axis needs at least one node");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw InvalidInput("interpolation nodes must increase strictly");
  }
  if (n < 4) return;

  // Rows: not-a-knot at the first interior node, the n-2 continuity
  // equations, not-a-knot at the last interior node. A M = B y.
  std::vector<double> h(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) h[i] = nodes_[i + 1] - nodes_[i];
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  a(0, 0) = h[1];
  a(0, 1) = -(h[0] + h[1]);
  a(0, 2) = h[0];
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    a(i, i - 1) = h[i - 1];
    a(i, i) = 2.0 * (h[i - 1] + h[i]);
    a(i, i + 1) = h[i];
    b(i, i - 1) = 6.0 / h[i - 1];
    b(i, i) = -6.0 / h[i - 1] - 6.0 / h[i];
    b(i, i + 1) = 6.0 / h[i];
  }
  a(n - 1, n - 3) = h[n - 2];
  a(n - 1, n - 2) = -(h[n - 3] + h[n - 2]);
  a(n - 1, n - 1) = h[n - 3];
  second_ = a.fullPivLu().solve(b);
}

bool SplineAxis::contains(double x) const { return x >= nodes_.front() && x <= nodes_.back(); }

Eigen::VectorXd SplineAxis::weights(double x) const {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  if (!contains(x)) throw InvalidInput("interpolation query outside the grid (no extrapolation)");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  if (n == 1) {
    w(0) = 1.0;
    return w;
  }
  if (n < 4) {
    // Lagrange form through all nodes.
    for (Eigen::Index i = 0; i < n; ++i) {
      double l = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) l *= (x - nodes_[j]) / (nodes_[i] - nodes_[j]);
      }
      w(i) = l;
    }
    return w;
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  Eigen::Index i = std::clamp<Eigen::Index>((it - nodes_.begin()) - 1, 0, n - 2);
  const double x0 = nodes_[i], x1 = nodes_[i + 1], h = x1 - x0;
  const double u = x1 - x, v = x - x0;
  const double cm0 = (u * u * u / h - u * h) / 6.0;
  const double cm1 = (v * v * v / h - v * h) / 6.0;
  w = cm0 * second_.row(i).transpose() + cm1 * second_.row(i + 1).transpose();
  w(i) += u / h;
  w(i + 1) += v / h;
  return w;
}

GridInterpolator::GridInterpolator(std::vector<double> x, std::vector<double> y,
                                   std::vector<Eigen::MatrixXd> channels)
    : x_(std::move(x)), y_(std::move(y)), channels_(std::move(channels)) {
  for (const auto& c : channels_) {
    if (c.rows() != static_cast<Eigen::Index>(x_.nodes().size()) ||
        c.cols() != static_cast<Eigen::Index>(y_.nodes().size())) {
      throw InvalidInput("interpolation channel does not match the grid shape");
    }
  }
}

Eigen::VectorXd GridInterpolator::operator()(double x, double y) const {
  const Eigen::VectorXd wx = x_.weights(x);
  const Eigen::VectorXd wy = y_.weights(y);
  Eigen::VectorXd out(channels_.size());
  for (std::size_t c = 0; c < channels_.size(); ++c) out(c) = wx.dot(channels_[c] * wy);
  return out;
}

}  // namespace crosc
