#include "crosc/effham.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "crosc/error.hpp"

namespace crosc {

namespace {

using nlohmann::json;

constexpr double kPivotFloor = 1e-14;
constexpr double kDetFloor = 1e-14;

Eigen::MatrixXcd gather(const Eigen::MatrixXcd& h, const std::vector<Eigen::Index>& rows,
                        const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXcd out(rows.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) out(i, j) = h(rows[i], cols[j]);
  }
  return out;
}

std::string format_complex(cd z) {
  std::ostringstream os;
  os.precision(10);
  os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

linalg::LuSolver factorize(const Eigen::MatrixXcd& a, cd energy) {
  try {
    return linalg::LuSolver(a);
  } catch (const NumericalError&) {
    throw PoleError("E = " + format_complex(energy) + " is a Q-space eigenvalue (singular E - QHQ)",
                    energy.real(), energy.imag());
  }
}

json complex_json(cd z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

cd complex_from(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_object()) {
    throw InvalidInput(std::string("H_eff dump: missing complex field '") + key + "'");
  }
  const json& z = doc.at(key);
  if (!z.contains("re") || !z.contains("im") || !z.at("re").is_number() || !z.at("im").is_number()) {
    throw InvalidInput(std::string("H_eff dump: field '") + key + "' needs numeric re/im");
  }
  return {z.at("re").get<double>(), z.at("im").get<double>()};
}

json index_json(const FloquetIndex& idx, const std::string& label) {
  json j{{"level", idx.level}, {"photons", idx.photons}};
  if (!label.empty()) j["label"] = label;
  return j;
}

}  // namespace

Eigen::Index Partition::q_position(Eigen::Index flat) const {
  const auto it = std::lower_bound(q_flat.begin(), q_flat.end(), flat);
  if (it == q_flat.end() || *it != flat) return -1;
  return it - q_flat.begin();
}

Eigen::Index Partition::flat(const FloquetIndex& idx) const {
  if (idx.level < 0 || idx.level >= n_levels || idx.photons < window.k_min || idx.photons > window.k_max) return -1;
  return static_cast<Eigen::Index>(idx.photons - window.k_min) * n_levels + idx.level;
}

Partition make_partition(const FloquetMatrix& matrix, const FloquetIndex& ground, const FloquetIndex& excited) {
  if (ground == excited) throw InvalidInput("essential states must be distinct");
  Partition p;
  p.ground = ground;
  p.excited = excited;
  p.n_levels = matrix.n_levels();
  p.window = matrix.window();
  p.p_flat = {matrix.flat(ground), matrix.flat(excited)};
  p.q_flat.reserve(matrix.dimension() - 2);
  for (Eigen::Index i = 0; i < matrix.dimension(); ++i) {
    if (i != p.p_flat[0] && i != p.p_flat[1]) p.q_flat.push_back(i);
  }
  return p;
}

cd ReducedWaveOp::element(Eigen::Index q_flat_index, int column) const {
  if (column < 0 || column > 1) throw InvalidInput("chi column must be 0 (ground) or 1 (excited)");
  if (q_flat_index == partition.p_flat[0] || q_flat_index == partition.p_flat[1]) return 0.0;
  const Eigen::Index pos = partition.q_position(q_flat_index);
  if (pos < 0) throw InvalidInput("state outside the Floquet window; enlarge [k_min, k_max]");
  return matrix(pos, column);
}

cd default_e_ref(const FloquetMatrix& matrix, const Partition& partition) {
  const auto& h = matrix.matrix();
  return 0.5 * (h(partition.p_flat[0], partition.p_flat[0]) + h(partition.p_flat[1], partition.p_flat[1]));
}

QResolvent::QResolvent(const FloquetMatrix& matrix, const Partition& partition, cd energy,
                       double pole_tolerance)
    : energy_(energy),
      php_(gather(matrix.matrix(), {partition.p_flat[0], partition.p_flat[1]},
                  {partition.p_flat[0], partition.p_flat[1]})),
      pvq_(gather(matrix.matrix(), {partition.p_flat[0], partition.p_flat[1]}, partition.q_flat)),
      qvp_(gather(matrix.matrix(), partition.q_flat, {partition.p_flat[0], partition.p_flat[1]})),
      lu_(factorize(energy * Eigen::MatrixXcd::Identity(partition.q_flat.size(), partition.q_flat.size()) -
                        gather(matrix.matrix(), partition.q_flat, partition.q_flat),
                    energy)) {
  // Two steps of inverse iteration: theta ~ 1/(E - mu) for the closest mu.
  const Eigen::Index nq = static_cast<Eigen::Index>(partition.q_flat.size());
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(nq) / std::sqrt(static_cast<double>(nq));
  x = lu_.solve(x);
  x /= x.norm();
  const Eigen::VectorXcd y = lu_.solve(x);
  const cd theta = x.dot(y);
  nearest_pole_ = std::abs(theta) > 0.0 ? energy - 1.0 / theta : cd{std::numeric_limits<double>::infinity()};
  if (lu_.pivot_ratio() < kPivotFloor || std::abs(energy - nearest_pole_) < pole_tolerance ||
      !y.allFinite()) {
    throw PoleError("E = " + format_complex(energy) + " is within " + std::to_string(pole_tolerance) +
                        " of a Q-space eigenvalue (estimate " + format_complex(nearest_pole_) + ")",
                    nearest_pole_.real(), nearest_pole_.imag());
  }
  chi_ = lu_.solve(qvp_);
}

Eigen::Matrix2cd heff_energy_dependent(const FloquetMatrix& matrix, const Partition& partition, cd energy) {
  const QResolvent r(matrix, partition, energy);
  return r.php() + r.pvq() * r.chi();
}

EffectiveHamiltonian heff0(const FloquetMatrix& matrix, const Partition& partition, cd e_ref) {
  return {heff_energy_dependent(matrix, partition, e_ref), 0, e_ref, partition};
}

CorrectionC correction_C(const FloquetMatrix& matrix, const Partition& partition, cd e_ref) {
  const QResolvent r(matrix, partition, e_ref);
  return {r.pvq() * r.chi2()};
}

EffectiveHamiltonian heff1(const FloquetMatrix& matrix, const Partition& partition, cd e_ref) {
  return effham_bundle(matrix, partition, e_ref).h1;
}

Eigen::Matrix2cd heff1_complex_symmetric(const EffectiveHamiltonian& h1, const CorrectionC& c) {
  const Eigen::Matrix2cd root = linalg::sqrtm2(Eigen::Matrix2cd::Identity() + c.matrix);
  return root * h1.matrix * root.inverse();
}

ReducedWaveOp reduced_wave_operator(const FloquetMatrix& matrix, const Partition& partition, cd e_ref) {
  const QResolvent r(matrix, partition, e_ref);
  return {r.chi(), partition};
}

EffhamBundle effham_bundle(const FloquetMatrix& matrix, const Partition& partition, cd e_ref,
                           double pole_tolerance) {
  const QResolvent r(matrix, partition, e_ref, pole_tolerance);
  EffhamBundle out;
  out.h0 = {r.php() + r.pvq() * r.chi(), 0, e_ref, partition};
  out.c.matrix = r.pvq() * r.chi2();
  out.chi = {r.chi(), partition};
  out.pivot_ratio = r.pivot_ratio();
  out.nearest_pole = r.nearest_pole();

  const Eigen::Matrix2cd p_plus_c = Eigen::Matrix2cd::Identity() + out.c.matrix;
  out.p_plus_c_det = std::abs(p_plus_c.determinant());
  if (out.p_plus_c_det < kDetFloor) {
    throw NumericalError("P + C is near-singular (|det| = " + std::to_string(out.p_plus_c_det) + ")");
  }
  out.h1 = {p_plus_c.inverse() * (out.h0.matrix + e_ref * out.c.matrix), 1, e_ref, partition};
  try {
    out.h1_cs = heff1_complex_symmetric(out.h1, out.c);
  } catch (const NumericalError&) {
    out.h1_cs.reset();
  }
  return out;
}

EffhamBundle effham_bundle(const FloquetMatrix& matrix, const Partition& partition) {
  return effham_bundle(matrix, partition, default_e_ref(matrix, partition));
}

std::array<Eigen::Index, 2> match_p_dominant(const FloquetEigensystem& es, const Partition& partition,
                                             const Eigen::Vector2cd& reference) {
  const Eigen::Index n = es.quasienergies.size();
  if (n < 2) throw InvalidInput("eigensystem too small for a two-state match");
  Eigen::VectorXd weight(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    weight(j) = std::norm(es.right(partition.p_flat[0], j)) + std::norm(es.right(partition.p_flat[1], j));
  }
  auto distance = [&](Eigen::Index j) {
    return std::min(std::abs(es.quasienergies(j) - reference(0)), std::abs(es.quasienergies(j) - reference(1)));
  };
  auto better = [&](Eigen::Index i, Eigen::Index j) {
    const double scale = std::max(weight(i), weight(j));
    if (std::abs(weight(i) - weight(j)) > 1e-12 * scale) return weight(i) > weight(j);
    return distance(i) < distance(j);
  };
  Eigen::Index first = 0;
  for (Eigen::Index j = 1; j < n; ++j) {
    if (better(j, first)) first = j;
  }
  Eigen::Index second = first == 0 ? 1 : 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != first && better(j, second)) second = j;
  }
  const double straight = std::abs(es.quasienergies(first) - reference(0)) +
                          std::abs(es.quasienergies(second) - reference(1));
  const double swapped = std::abs(es.quasienergies(first) - reference(1)) +
                         std::abs(es.quasienergies(second) - reference(0));
  if (swapped < straight) return {second, first};
  return {first, second};
}

nlohmann::json heff_to_json(const EffectiveHamiltonian& h) {
  return json{
      {"order", h.order},
      {"e_ref", complex_json(h.e_ref)},
      {"h11", complex_json(h.matrix(0, 0))},
      {"h12", complex_json(h.matrix(0, 1))},
      {"h21", complex_json(h.matrix(1, 0))},
      {"h22", complex_json(h.matrix(1, 1))},
      {"partition",
       {{"ground", index_json(h.partition.ground, h.partition.labels[0])},
        {"excited", index_json(h.partition.excited, h.partition.labels[1])}}},
  };
}

EffectiveHamiltonian heff_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidInput("H_eff dump must be a JSON object");
  if (!doc.contains("order") || !doc.at("order").is_number_integer()) {
    throw InvalidInput("H_eff dump: missing integer field 'order'");
  }
  EffectiveHamiltonian h;
  h.order = doc.at("order").get<int>();
  if (h.order != 0 && h.order != 1) throw InvalidInput("H_eff dump: order must be 0 or 1");
  h.e_ref = complex_from(doc, "e_ref");
  h.matrix << complex_from(doc, "h11"), complex_from(doc, "h12"), complex_from(doc, "h21"),
      complex_from(doc, "h22");
  if (doc.contains("partition")) {
    const json& p = doc.at("partition");
    auto read_index = [&](const char* key, FloquetIndex& idx, std::string& label) {
      if (!p.contains(key)) throw InvalidInput(std::string("H_eff dump: partition lacks '") + key + "'");
      const json& j = p.at(key);
      idx.level = j.at("level").get<int>();
      idx.photons = j.at("photons").get<int>();
      label = j.value("label", "");
    };
    read_index("ground", h.partition.ground, h.partition.labels[0]);
    read_index("excited", h.partition.excited, h.partition.labels[1]);
  }
  return h;
}

}  // namespace crosc
