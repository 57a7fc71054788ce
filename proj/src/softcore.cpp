#include "crosc/softcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "crosc/error.hpp"
#include "crosc/linalg.hpp"

namespace crosc {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Colbert-Miller DVR for a box (-extent, extent) with Dirichlet walls: the
// kinetic matrix is exact for the sine basis of the box.
Eigen::MatrixXd box_kinetic(const GridSpec& grid) {
  using std::numbers::pi;
  const int n = grid.points;
  const double length = 2.0 * grid.extent;
  const double intervals = n + 1;
  const double prefactor = pi * pi / (4.0 * length * length);
  Eigen::MatrixXd t(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      double v;
      if (i == j) {
        const double s = std::sin(pi * i / intervals);
        v = (2.0 * intervals * intervals + 1.0) / 3.0 - 1.0 / (s * s);
      } else {
        const double s1 = std::sin(pi * (i - j) / (2.0 * intervals));
        const double s2 = std::sin(pi * (i + j) / (2.0 * intervals));
        v = 1.0 / (s1 * s1) - 1.0 / (s2 * s2);
      }
      t(i - 1, j - 1) = prefactor * sign * v;
    }
  }
  return t;
}

int parity_of(const Eigen::VectorXd& v) {
  const double overlap = v.dot(v.reverse());
  return overlap >= 0.0 ? 0 : 1;
}

}  // namespace

void GridSpec::validate() const {
  if (points < 64) throw InvalidInput("grid: points must be >= 64");
  if (!(extent > 0.0)) throw InvalidInput("grid: extent must be positive");
  if (!(softening > 0.0)) throw InvalidInput("grid: softening a^2 must be positive");
  if (!(cap_start > 0.0 && cap_start < extent)) throw InvalidInput("grid: need 0 < cap_start < extent");
  if (!(cap_strength >= 0.0)) throw InvalidInput("grid: cap_strength must be non-negative");
}

double absorber(const GridSpec& grid, double x) {
  const double r = std::abs(x);
  if (r <= grid.cap_start) return 0.0;
  const double u = (r - grid.cap_start) / (grid.extent - grid.cap_start);
  return grid.cap_strength * u * u;
}

AtomModel build_softcore_model(const GridSpec& grid, int n_keep, AbsorberTreatment treatment) {
  grid.validate();
  if (n_keep < 1) throw InvalidInput("n_keep must be positive");
  if (n_keep > grid.points) {
    throw InvalidInput("n_keep (" + std::to_string(n_keep) + ") exceeds available states (" +
                       std::to_string(grid.points) + ")");
  }
  const int n = grid.points;
  const double h = grid.spacing();
  Eigen::VectorXd x(n), w(n);
  for (int i = 0; i < n; ++i) {
    x(i) = -grid.extent + h * (i + 1);
    w(i) = absorber(grid, x(i));
  }

  Eigen::MatrixXd ham = box_kinetic(grid);
  for (int i = 0; i < n; ++i) ham(i, i) -= 1.0 / std::sqrt(x(i) * x(i) + grid.softening);
  const linalg::SymmetricEigen field_free = linalg::eigh_lowest(ham, n_keep);
  const Eigen::MatrixXd& phi = field_free.vectors;  // orthonormal columns on the grid

  // Products are symmetrized so rounding cannot break d = d^T.

  Eigen::MatrixXd dipole_ff = phi.transpose() * x.asDiagonal() * phi;
  dipole_ff = 0.5 * (dipole_ff + dipole_ff.transpose()).eval();
  const Eigen::MatrixXd cap_ff = phi.transpose() * w.asDiagonal() * phi;

  std::vector<int> parity(n_keep);
  for (int k = 0; k < n_keep; ++k) parity[k] = parity_of(phi.col(k));

  std::vector<Level> levels;
  Eigen::MatrixXcd dipole;

  if (treatment == AbsorberTreatment::kFirstOrder) {
    dipole = dipole_ff.cast<cd>();
    for (int k = 0; k < n_keep; ++k) {
      levels.push_back({"", cd{field_free.values(k), -cap_ff(k, k)}, parity[k]});
    }
  } else {
    Eigen::MatrixXcd hk = cd{0.0, -1.0} * cap_ff.cast<cd>();
    hk.diagonal() += field_free.values.cast<cd>();
    linalg::ComplexEigen ce = linalg::eig_general(hk);
    std::vector<int> order(n_keep);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return ce.values(a).real() < ce.values(b).real(); });
    Eigen::MatrixXcd u(n_keep, n_keep);
    for (int k = 0; k < n_keep; ++k) {
      Eigen::VectorXcd v = ce.vectors.col(order[k]);
      const cd cnorm = std::sqrt(cd(v.transpose() * v));
      if (std::abs(cnorm) < 1e-12) {
        throw NumericalError("self-orthogonal absorber eigenvector (c-norm below 1e-12)");
      }
      v /= cnorm;
      Eigen::Index dominant = 0;
      v.cwiseAbs().maxCoeff(&dominant);
      if (v(dominant).real() < 0.0) v = -v;
      u.col(k) = v;
      levels.push_back({"", ce.values(order[k]), parity[dominant]});
    }
    dipole = u.transpose() * dipole_ff.cast<cd>() * u;
    dipole = 0.5 * (dipole + dipole.transpose()).eval();
  }

  for (int k = 0; k < n_keep; ++k) {
    Level& lv = levels[k];
    lv.label = (lv.symmetry == 0 ? "e" : "o") + std::to_string(k);
    // Rounding in the absorber diagonalization can leave +1e-17 imaginary parts.
    if (lv.energy.imag() > 0.0 && lv.energy.imag() < AtomModel::kWidthSignTolerance) {
      lv.energy = {lv.energy.real(), 0.0};
    }
  }
  for (Eigen::Index i = 0; i < dipole.rows(); ++i) {
    for (Eigen::Index j = 0; j < dipole.cols(); ++j) {
      if (levels[i].symmetry == levels[j].symmetry) dipole(i, j) = 0.0;
    }
  }

  std::map<std::string, std::string> meta{
      {"source", "softcore"},
      {"extent", format_double(grid.extent)},
      {"points", std::to_string(grid.points)},
      {"softening", format_double(grid.softening)},
      {"cap_start", format_double(grid.cap_start)},
      {"cap_strength", format_double(grid.cap_strength)},
      {"absorber", treatment == AbsorberTreatment::kFirstOrder ? "first-order" : "exact"},
  };
  return AtomModel(std::move(levels), std::move(dipole), std::move(meta));
}

AtomModel helium_like_model() {
  GridSpec grid;
  AtomModel base = build_softcore_model(grid, 100);
  std::vector<Level> levels = base.levels();
  levels[0].label = "1s2";
  levels[1].label = "1s2p";
  levels[2].label = "1s3d";
  auto meta = base.metadata();
  meta["source"] = "preset:helium-like";
  return AtomModel(std::move(levels), base.dipole(), std::move(meta));
}

}  // namespace crosc
