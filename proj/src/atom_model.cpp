#include "crosc/atom_model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "crosc/error.hpp"
#include "crosc/units.hpp"

namespace crosc {

namespace {

using nlohmann::json;

std::string describe(std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << "(" << i << "," << j << ")";
  return os.str();
}

const json& require(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw InvalidInput("schema violation: missing field '" + std::string(key) + "' in " + where);
  }
  return doc.at(key);
}

double require_number(const json& doc, const char* key, const std::string& where) {
  const json& v = require(doc, key, where);
  if (!v.is_number()) {
    throw InvalidInput("schema violation: field '" + std::string(key) + "' in " + where +
                       " must be a number");
  }
  return v.get<double>();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InvalidInput("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace

AtomModel::AtomModel(std::vector<Level> levels, Eigen::MatrixXcd dipole,
                     std::map<std::string, std::string> metadata)
    : levels_(std::move(levels)), dipole_(std::move(dipole)), metadata_(std::move(metadata)) {
  const auto n = static_cast<Eigen::Index>(levels_.size());
  if (n == 0) throw InvalidInput("atom model needs at least one level");
  if (dipole_.rows() != n || dipole_.cols() != n) {
    throw InvalidInput("dipole matrix dimension does not match level count");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const Level& lv = levels_[i];
    if (lv.label.empty()) throw InvalidInput("level " + std::to_string(i) + " has an empty label");
    if (!seen.insert(lv.label).second) throw InvalidInput("duplicate level label '" + lv.label + "'");
    if (!std::isfinite(lv.energy.real()) || !std::isfinite(lv.energy.imag())) {
      throw InvalidInput("level '" + lv.label + "' has a non-finite energy");
    }
    if (lv.energy.imag() > kWidthSignTolerance) {
      throw InvalidInput("level '" + lv.label + "' has Im(E) > 0 (negative width)");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(std::abs(dipole_(i, j)))) {
        throw InvalidInput("non-finite dipole element " + describe(i, j));
      }
      if (std::abs(dipole_(i, j) - dipole_(j, i)) > kSymmetryTolerance) {
        throw InvalidInput("dipole matrix is not complex-symmetric at " + describe(i, j));
      }
    }
  }
}

Eigen::VectorXcd AtomModel::energies() const {
  Eigen::VectorXcd e(static_cast<Eigen::Index>(levels_.size()));
  for (std::size_t i = 0; i < levels_.size(); ++i) e(static_cast<Eigen::Index>(i)) = levels_[i].energy;
  return e;
}

std::size_t AtomModel::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].label == label) return i;
  }
  throw InvalidInput("unknown level label '" + label + "'");
}

AtomModel AtomModel::shifted(double offset) const {
  auto levels = levels_;
  for (auto& lv : levels) lv.energy += offset;
  return AtomModel(std::move(levels), dipole_, metadata_);
}

AtomModel AtomModel::with_dipole_phase(double phase) const {
  return AtomModel(levels_, dipole_ * std::polar(1.0, phase), metadata_);
}

std::vector<SelectionRuleViolation> selection_rule_violations(const AtomModel& atom, double tol) {
  std::vector<SelectionRuleViolation> out;
  const auto& lv = atom.levels();
  for (std::size_t i = 0; i < lv.size(); ++i) {
    for (std::size_t j = i; j < lv.size(); ++j) {
      if ((lv[i].symmetry - lv[j].symmetry) % 2 != 0) continue;
      const double mag = std::abs(atom.dipole()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      if (mag > tol) out.push_back({i, j, mag});
    }
  }
  return out;
}

AtomModel parse_atom_model(const json& doc) {
  const json& levels_doc = require(doc, "levels", "atom model");
  if (!levels_doc.is_array() || levels_doc.empty()) {
    throw InvalidInput("schema violation: 'levels' must be a non-empty array");
  }
  std::vector<Level> levels;
  for (std::size_t i = 0; i < levels_doc.size(); ++i) {
    const json& l = levels_doc[i];
    const std::string where = "levels[" + std::to_string(i) + "]";
    const json& label = require(l, "label", where);
    if (!label.is_string()) throw InvalidInput("schema violation: " + where + ".label must be a string");
    Level lv;
    lv.label = label.get<std::string>();
    lv.energy = {require_number(l, "re", where), require_number(l, "im", where)};
    const json& sym = require(l, "sym", where);
    if (!sym.is_number_integer()) throw InvalidInput("schema violation: " + where + ".sym must be an integer");
    lv.symmetry = sym.get<int>();
    levels.push_back(std::move(lv));
  }

  const auto n = static_cast<Eigen::Index>(levels.size());
  Eigen::MatrixXcd dipole = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXi given = Eigen::MatrixXi::Zero(n, n);
  if (doc.contains("dipole")) {
    const json& dip = doc.at("dipole");
    if (!dip.is_array()) throw InvalidInput("schema violation: 'dipole' must be an array");
    for (std::size_t k = 0; k < dip.size(); ++k) {
      const json& e = dip[k];
      const std::string where = "dipole[" + std::to_string(k) + "]";
      const json& ji = require(e, "i", where);
      const json& jj = require(e, "j", where);
      if (!ji.is_number_integer() || !jj.is_number_integer()) {
        throw InvalidInput("schema violation: " + where + " indices must be integers");
      }
      const auto i = ji.get<Eigen::Index>();
      const auto j = jj.get<Eigen::Index>();
      if (i < 0 || j < 0 || i >= n || j >= n) {
        throw InvalidInput("schema violation: " + where + " index out of range");
      }
      const cd value{require_number(e, "re", where), require_number(e, "im", where)};
      for (auto [r, c] : {std::pair{i, j}, std::pair{j, i}}) {
        if (given(r, c) && std::abs(dipole(r, c) - value) > AtomModel::kSymmetryTolerance) {
          throw InvalidInput("dipole matrix is not complex-symmetric: conflicting entries at " +
                             describe(r, c));
        }
        dipole(r, c) = value;
        given(r, c) = 1;
      }
    }
  }

  std::map<std::string, std::string> meta;
  if (doc.contains("meta")) {
    const json& m = doc.at("meta");
    if (!m.is_object()) throw InvalidInput("schema violation: 'meta' must be an object");
    for (auto it = m.begin(); it != m.end(); ++it) {
      meta[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
  }
  return AtomModel(std::move(levels), std::move(dipole), std::move(meta));
}

AtomModel load_atom_model(const std::string& path) { return parse_atom_model(parse_file(path)); }

json atom_model_to_json(const AtomModel& atom) {
  json doc;
  doc["levels"] = json::array();
  for (const auto& lv : atom.levels()) {
    doc["levels"].push_back(
        {{"label", lv.label}, {"re", lv.energy.real()}, {"im", lv.energy.imag()}, {"sym", lv.symmetry}});
  }
  doc["dipole"] = json::array();
  const auto& d = atom.dipole();
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = i; j < d.cols(); ++j) {
      if (d(i, j) == cd{0.0, 0.0}) continue;
      doc["dipole"].push_back({{"i", i}, {"j", j}, {"re", d(i, j).real()}, {"im", d(i, j).imag()}});
    }
  }
  doc["meta"] = json::object();
  for (const auto& [k, v] : atom.metadata()) doc["meta"][k] = v;
  return doc;
}

void save_atom_model(const AtomModel& atom, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write file: " + path);
  out << atom_model_to_json(atom).dump(1) << "\n";
}

void LaserField::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidInput("laser field: omega must be > 0");
  if (!(e0 >= 0.0) || !std::isfinite(e0)) throw InvalidInput("laser field: E0 must be >= 0");
  if (envelope == EnvelopeKind::kGaussian && !(fwhm > 0.0)) {
    throw InvalidInput("laser field: Gaussian envelope needs fwhm > 0");
  }
}

double LaserField::intensity_envelope(double t) const {
  if (envelope == EnvelopeKind::kRectangular) return 1.0;
  const double x = 2.0 * t / fwhm;
  return std::exp(-std::numbers::ln2 * x * x);
}

double LaserField::field_envelope(double t) const {
  if (envelope == EnvelopeKind::kRectangular) return 1.0;
  return std::sqrt(intensity_envelope(t));
}

double LaserField::field_at(double t) const {
  return e0 * field_envelope(t) * std::cos(omega * t + phase);
}

double LaserField::period() const { return 2.0 * std::numbers::pi / omega; }

LaserField monochromatic(double omega, double e0, double phase) {
  LaserField f;
  f.omega = omega;
  f.e0 = e0;
  f.phase = phase;
  f.validate();
  return f;
}

LaserField parse_laser_field(const json& doc) {
  if (!doc.is_object()) throw InvalidInput("schema violation: field spec must be an object");
  LaserField f;
  if (doc.contains("omega_au")) {
    f.omega = require_number(doc, "omega_au", "field");
  } else if (doc.contains("omega_ev")) {
    f.omega = units::ev_to_au(require_number(doc, "omega_ev", "field"));
  } else {
    throw InvalidInput("schema violation: field needs 'omega_ev' or 'omega_au'");
  }
  if (doc.contains("e0_au")) {
    f.e0 = require_number(doc, "e0_au", "field");
  } else if (doc.contains("intensity_wcm2")) {
    f.e0 = units::intensity_to_field(require_number(doc, "intensity_wcm2", "field"));
  } else {
    throw InvalidInput("schema violation: field needs 'intensity_wcm2' or 'e0_au'");
  }
  if (doc.contains("envelope")) {
    const json& env = doc.at("envelope");
    if (env.is_string() && env.get<std::string>() == "rect") {
      f.envelope = EnvelopeKind::kRectangular;
    } else if (env.is_object() && env.contains("gaussian")) {
      f.envelope = EnvelopeKind::kGaussian;
      f.fwhm = units::fs_to_au(require_number(env.at("gaussian"), "fwhm_fs", "envelope.gaussian"));
    } else {
      throw InvalidInput("schema violation: envelope must be \"rect\" or {\"gaussian\": {...}}");
    }
  }
  if (doc.contains("phase")) f.phase = require_number(doc, "phase", "field");
  f.validate();
  return f;
}

LaserField load_laser_field(const std::string& path) { return parse_laser_field(parse_file(path)); }

AtomModel two_level_model(double e1, double e2, double d12) {
  std::vector<Level> levels{{"a", {e1, 0.0}, 0}, {"b", {e2, 0.0}, 1}};
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 1) = d(1, 0) = d12;
  return AtomModel(std::move(levels), std::move(d), {{"source", "preset:two-level"}});
}

AtomModel ladder5_model() {
  std::vector<Level> levels{
      {"ground", {-0.90, 0.0}, 0},
      {"inter", {-0.40, 0.0}, 1},
      {"excited", {-0.15, -1e-5}, 2},
      {"ryd_p", {-0.11, -2e-4}, 1},
      {"ryd_f", {-0.085, -4e-4}, 3},
  };
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(5, 5);
  auto set = [&d](int i, int j, double v) { d(i, j) = d(j, i) = v; };
  set(0, 1, 0.1);
  set(0, 3, 0.02);
  set(1, 2, 1.0);
  set(2, 3, 3.0);
  set(2, 4, 4.0);
  return AtomModel(std::move(levels), std::move(d), {{"source", "preset:ladder5"}});
}

}  // namespace crosc
