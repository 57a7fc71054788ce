#include "crosc/floquet.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "crosc/error.hpp"
#include "crosc/linalg.hpp"

namespace crosc {

namespace {

constexpr double kSelfOrthogonalLimit = 1e-12;
constexpr double kClusterTolerance = 1e-9;

std::string format_eigenvalue(cd z) {
  std::ostringstream os;
  os.precision(12);
  os << "(" << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i)";
  return os.str();
}

bool is_complex_symmetric(const Eigen::MatrixXcd& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * scale;
}

// Groups eigenvalues that coincide to rounding; returns cluster members.
std::vector<std::vector<Eigen::Index>> clusters(const Eigen::VectorXcd& values) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return values(a).real() < values(b).real(); });
  std::vector<std::vector<Eigen::Index>> out;
  std::vector<bool> used(n, false);
  for (Eigen::Index p = 0; p < n; ++p) {
    const Eigen::Index i = order[p];
    if (used[i]) continue;
    std::vector<Eigen::Index> group{i};
    used[i] = true;
    const double tol = kClusterTolerance * std::max(1.0, std::abs(values(i)));
    for (Eigen::Index r = p + 1; r < n; ++r) {
      const Eigen::Index j = order[r];
      if (values(j).real() - values(i).real() > tol) break;
      if (!used[j] && std::abs(values(j) - values(i)) <= tol) {
        group.push_back(j);
        used[j] = true;
      }
    }
    out.push_back(std::move(group));
  }
  return out;
}

// c-orthonormalizes the columns of one degenerate cluster in place
// (pivoted Gram-Schmidt in the unconjugated product).
void c_orthonormalize(Eigen::MatrixXcd& vecs, const std::vector<Eigen::Index>& group,
                      const Eigen::VectorXcd& values) {
  std::vector<Eigen::Index> remaining = group;
  while (!remaining.empty()) {
    auto best = remaining.begin();
    double best_norm = -1.0;
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      const double c = std::abs(cd(vecs.col(*it).transpose() * vecs.col(*it))) / vecs.col(*it).squaredNorm();
      if (c > best_norm) {
        best_norm = c;
        best = it;
      }
    }
    const Eigen::Index j = *best;
    remaining.erase(best);
    if (best_norm < kSelfOrthogonalLimit) {
      std::string partner = "none";
      double gap = std::numeric_limits<double>::infinity();
      for (Eigen::Index m = 0; m < values.size(); ++m) {
        if (m != j && std::abs(values(m) - values(j)) < gap) {
          gap = std::abs(values(m) - values(j));
          partner = format_eigenvalue(values(m));
        }
      }
      throw NumericalError("self-orthogonal eigenvector (c-norm below 1e-12, exceptional point) at " +
                           format_eigenvalue(values(j)) + ", nearest eigenvalue " + partner);
    }
    vecs.col(j) /= std::sqrt(cd(vecs.col(j).transpose() * vecs.col(j)));
    for (Eigen::Index m : remaining) {
      const cd proj = vecs.col(j).transpose() * vecs.col(m);
      vecs.col(m) -= proj * vecs.col(j);
    }
  }
}

}  // namespace

PhotonWindow default_window(int order, int guard) {
  if (order < 1) throw InvalidInput("photon order must be >= 1");
  if (guard < 0) throw InvalidInput("guard block count must be >= 0");
  return {-order - guard, guard};
}

FloquetMatrix::FloquetMatrix(const AtomModel& atom, const LaserField& field, PhotonWindow window,
                             Eigen::Index dimension_cap)
    : n_levels_(static_cast<int>(atom.size())), window_(window), omega_(field.omega), e0_(field.e0) {
  field.validate();
  if (field.envelope != EnvelopeKind::kRectangular) {
    throw InvalidInput("Floquet assembly needs a monochromatic (rectangular) field");
  }
  if (window.k_min >= window.k_max) throw InvalidInput("photon window needs k_min < k_max");
  const Eigen::Index dim = static_cast<Eigen::Index>(n_levels_) * window.blocks();
  if (dim > dimension_cap) {
    throw InvalidInput("Floquet dimension " + std::to_string(dim) + " exceeds the cap of " +
                       std::to_string(dimension_cap) + " (truncation misuse?)");
  }
  const Eigen::VectorXcd e = atom.energies();
  const Eigen::MatrixXcd v = (0.5 * e0_) * atom.dipole();
  const Eigen::Index n = n_levels_;
  matrix_ = Eigen::MatrixXcd::Zero(dim, dim);
  for (int b = 0; b < window.blocks(); ++b) {
    const double shift = (window.k_min + b) * omega_;
    for (Eigen::Index i = 0; i < n; ++i) matrix_(b * n + i, b * n + i) = e(i) + shift;
    if (b + 1 < window.blocks() && e0_ != 0.0) {
      matrix_.block(b * n, (b + 1) * n, n, n) = v;
      matrix_.block((b + 1) * n, b * n, n, n) = v;
    }
  }
}

bool FloquetMatrix::contains(const FloquetIndex& idx) const {
  return idx.level >= 0 && idx.level < n_levels_ && idx.photons >= window_.k_min &&
         idx.photons <= window_.k_max;
}

Eigen::Index FloquetMatrix::flat(const FloquetIndex& idx) const {
  if (!contains(idx)) {
    throw InvalidInput("Floquet index (level " + std::to_string(idx.level) + ", k = " +
                       std::to_string(idx.photons) + ") lies outside the basis");
  }
  return static_cast<Eigen::Index>(idx.photons - window_.k_min) * n_levels_ + idx.level;
}

FloquetIndex FloquetMatrix::index_at(Eigen::Index flat) const {
  if (flat < 0 || flat >= dimension()) throw InvalidInput("flat index outside the Floquet basis");
  return {static_cast<int>(flat % n_levels_), static_cast<int>(flat / n_levels_) + window_.k_min};
}

Eigen::MatrixXcd FloquetMatrix::coupling() const {
  Eigen::MatrixXcd v = matrix_;
  v.diagonal().setZero();
  return v;
}

FloquetMatrix assemble_floquet(const AtomModel& atom, const LaserField& field, int k_min, int k_max,
                               Eigen::Index dimension_cap) {
  return FloquetMatrix(atom, field, {k_min, k_max}, dimension_cap);
}

bool FloquetEigensystem::contains(const FloquetIndex& idx) const {
  return idx.level >= 0 && idx.level < n_levels && idx.photons >= window.k_min && idx.photons <= window.k_max;
}

Eigen::Index FloquetEigensystem::flat(const FloquetIndex& idx) const {
  if (!contains(idx)) {
    throw InvalidInput("Floquet index (level " + std::to_string(idx.level) + ", k = " +
                       std::to_string(idx.photons) + ") lies outside the basis");
  }
  return static_cast<Eigen::Index>(idx.photons - window.k_min) * n_levels + idx.level;
}

FloquetEigensystem diagonalize_floquet(const FloquetMatrix& matrix) {
  linalg::ComplexEigen ce = linalg::eig_general(matrix.matrix());
  const Eigen::Index n = ce.values.size();

  // Deterministic ordering by (Re, Im).
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const cd x = ce.values(a), y = ce.values(b);
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  FloquetEigensystem es;
  es.quasienergies.resize(n);
  es.right.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    es.quasienergies(j) = ce.values(order[j]);
    es.right.col(j) = ce.vectors.col(order[j]);
  }
  es.n_levels = matrix.n_levels();
  es.window = matrix.window();
  es.omega = matrix.omega();

  // c-normalized right vectors make left ~ R^T for complex-symmetric H_F; the
  // exact inverse then removes the O(eps / gap) c-overlaps left between
  // nearly degenerate continuum-like states.
  if (is_complex_symmetric(matrix.matrix())) {
    for (const auto& group : clusters(es.quasienergies)) c_orthonormalize(es.right, group, es.quasienergies);
  }
  es.left = linalg::inverse(es.right);
  return es;
}

double biorthonormality_defect(const FloquetEigensystem& es) {
  const Eigen::Index n = es.right.cols();
  return (es.left * es.right - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

double relative_residual(const FloquetMatrix& matrix, const FloquetEigensystem& es) {
  const double hnorm = matrix.matrix().norm();
  const Eigen::MatrixXcd r = matrix.matrix() * es.right - es.right * es.quasienergies.asDiagonal();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    worst = std::max(worst, r.col(j).norm() / (hnorm * es.right.col(j).norm()));
  }
  return worst;
}

cd floquet_component(const FloquetEigensystem& es, const FloquetIndex& from, const FloquetIndex& to,
                     double t) {
  const Eigen::Index a = es.flat(from);
  const Eigen::Index b = es.flat(to);
  cd sum = 0.0;
  for (Eigen::Index j = 0; j < es.quasienergies.size(); ++j) {
    sum += es.right(b, j) * std::exp(cd{0.0, -1.0} * es.quasienergies(j) * t) * es.left(j, a);
  }
  return sum * std::exp(cd{0.0, to.photons * es.omega * t});
}

cd floquet_transition_amplitude(const FloquetEigensystem& es, const FloquetIndex& from, int to_level,
                                double t) {
  return floquet_transition_series(es, from, to_level, {t}).front();
}

std::vector<cd> floquet_transition_series(const FloquetEigensystem& es, const FloquetIndex& from,
                                          int to_level, const std::vector<double>& times) {
  const Eigen::Index a = es.flat(from);
  if (to_level < 0 || to_level >= es.n_levels) throw InvalidInput("target level outside the model");
  for (double t : times) {
    if (t < 0.0) throw InvalidInput("transition amplitude needs t >= 0");
  }
  const int blocks = es.window.blocks();
  const Eigen::Index n = es.quasienergies.size();
  // rows[k] = <b,k| R
  Eigen::MatrixXcd rows(blocks, n);
  for (int kb = 0; kb < blocks; ++kb) rows.row(kb) = es.right.row(static_cast<Eigen::Index>(kb) * es.n_levels + to_level);
  const Eigen::VectorXcd start = es.left.col(a);

  std::vector<cd> out;
  out.reserve(times.size());
  Eigen::VectorXcd evolved(n);
  for (double t : times) {
    for (Eigen::Index j = 0; j < n; ++j) evolved(j) = std::exp(cd{0.0, -1.0} * es.quasienergies(j) * t) * start(j);
    const Eigen::VectorXcd per_k = rows * evolved;
    cd sum = 0.0;
    for (int kb = 0; kb < blocks; ++kb) {
      sum += per_k(kb) * std::exp(cd{0.0, (es.window.k_min + kb) * es.omega * t});
    }
    out.push_back(sum);
  }
  return out;
}

void write_triplets(const FloquetMatrix& matrix, std::ostream& out) {
  const auto prec = out.precision(17);
  const Eigen::MatrixXcd& h = matrix.matrix();
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      if (h(i, j) != cd{0.0, 0.0}) out << i << ' ' << j << ' ' << h(i, j).real() << ' ' << h(i, j).imag() << '\n';
    }
  }
  out.precision(prec);
}

}  // namespace crosc
