#include "crosc/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "crosc/error.hpp"
#include "crosc/units.hpp"

namespace crosc {

namespace {

constexpr int kCoarseSamples = 401;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_sorted(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw InvalidInput(std::string("parameter grid: no ") + name);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw InvalidInput(std::string("parameter grid: non-finite ") + name);
    if (i > 0 && !(v[i] > v[i - 1])) throw InvalidInput(std::string("parameter grid: ") + name + " must increase");
  }
}

template <class F>
double golden_max(F&& f, double lo, double hi, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 300 && hi - lo > tol; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void ParamGrid::validate(bool cubic) const {
  check_sorted(omegas, "omegas");
  check_sorted(intensities, "intensities");
  if (omegas.front() <= 0.0) throw InvalidInput("parameter grid: omegas must be positive");
  if (intensities.front() < 0.0) throw InvalidInput("parameter grid: intensities must be non-negative");
  if (cubic) {
    for (const auto* axis : {&omegas, &intensities}) {
      if (axis->size() > 1 && axis->size() < 4) {
        throw InvalidInput("parameter grid: cubic interpolation needs >= 4 nodes per axis");
      }
    }
  }
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw InvalidInput("linspace needs a positive count");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
  out.back() = hi;
  return out;
}

std::size_t HeffGrid::failures() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const HeffNode& n) { return !n.valid; }));
}

EffhamBundle effham_at(const AtomModel& atom, const PartitionPolicy& policy, double omega, double intensity,
                       Partition* partition_out) {
  const FloquetMatrix fm(atom, monochromatic(omega, units::intensity_to_field(intensity)), policy.resolved_window());
  Partition p = make_partition(fm, {policy.ground_level, 0}, {policy.excited_level, -policy.order});
  p.labels = {atom.level(policy.ground_level).label, atom.level(policy.excited_level).label};
  if (partition_out) *partition_out = p;
  const cd e_ref = default_e_ref(fm, p) + policy.e_ref_offset.value_or(0.0);
  return effham_bundle(fm, p, e_ref);
}

HeffGrid scan_heff(const AtomModel& atom, const ParamGrid& grid, const PartitionPolicy& policy, int workers,
                   const ValidityThresholds& thresholds) {
  grid.validate();
  if (workers < 1) throw InvalidInput("worker count must be positive");
  HeffGrid out{grid, policy, std::vector<HeffNode>(grid.size())};
  const std::size_t n_int = grid.intensities.size();

  auto work = [&](std::size_t idx) {
    HeffNode& node = out.nodes[idx];
    const double omega = grid.omegas[idx / n_int];
    const double intensity = grid.intensities[idx % n_int];
    try {
      const EffhamBundle b = effham_at(atom, policy, omega, intensity);
      node.h1 = b.h1;
      node.cr = cr_amplitudes(b.chi, b.chi.partition);
      node.chi_ground_norm = b.chi.matrix.col(0).norm();
      node.correction_norm = b.c.matrix.cwiseAbs().maxCoeff();
      node.pole_distance = std::abs(b.h0.e_ref - b.nearest_pole);
      node.valid = node.h1.matrix.allFinite();
      if (!node.valid) node.error = "non-finite H_eff";
      else if (node.correction_norm > thresholds.max_correction) {
        node.valid = false;
        node.error = "linear correction |C| = " + format_number(node.correction_norm) + " above threshold";
      } else if (node.pole_distance < thresholds.min_pole_distance) {
        node.valid = false;
        node.error = "reference energy within " + format_number(node.pole_distance) + " of a Q-space pole";
      }
    } catch (const std::exception& e) {
      node.valid = false;
      node.error = e.what();
    }
  };

  const std::size_t n = grid.size();
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) work(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

namespace {

GridInterpolator build_interpolator(const HeffGrid& hgrid) {
  hgrid.grid.validate(true);
  if (hgrid.failures() > 0) {
    throw NumericalError("cannot interpolate: " + std::to_string(hgrid.failures()) + " grid node(s) are invalid");
  }
  const auto nw = static_cast<Eigen::Index>(hgrid.grid.omegas.size());
  const auto ni = static_cast<Eigen::Index>(hgrid.grid.intensities.size());
  std::vector<Eigen::MatrixXd> ch(14, Eigen::MatrixXd(nw, ni));
  for (Eigen::Index i = 0; i < nw; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) {
      const HeffNode& node = hgrid.node(i, j);
      const cd vals[7] = {node.h1.matrix(0, 0), node.h1.matrix(0, 1), node.h1.matrix(1, 0), node.h1.matrix(1, 1),
                          node.h1.e_ref,        node.cr.lambda_0,     node.cr.lambda_m4};
      for (int c = 0; c < 7; ++c) {
        ch[2 * c](i, j) = vals[c].real();
        ch[2 * c + 1](i, j) = vals[c].imag();
      }
    }
  }
  return GridInterpolator(hgrid.grid.omegas, hgrid.grid.intensities, std::move(ch));
}

}  // namespace

HeffInterpolator::HeffInterpolator(const HeffGrid& hgrid)
    : grid_(hgrid.grid),
      partition_(hgrid.nodes.empty() ? Partition{} : hgrid.nodes.front().h1.partition),
      order_(hgrid.policy.order),
      interp_(build_interpolator(hgrid)) {}

EffectiveHamiltonian HeffInterpolator::heff(double omega, double intensity) const {
  const Eigen::VectorXd v = interp_(omega, intensity);
  EffectiveHamiltonian h;
  h.matrix << cd{v(0), v(1)}, cd{v(2), v(3)}, cd{v(4), v(5)}, cd{v(6), v(7)};
  h.e_ref = {v(8), v(9)};
  h.order = 1;
  h.partition = partition_;
  return h;
}

CRAmplitudes HeffInterpolator::cr(double omega, double intensity) const {
  const Eigen::VectorXd v = interp_(omega, intensity);
  CRAmplitudes c;
  c.lambda_0 = {v(10), v(11)};
  c.lambda_m4 = {v(12), v(13)};
  c.lambda_sum = c.lambda_0 + c.lambda_m4;
  return c;
}

EffectiveHamiltonian interpolate_heff(const HeffGrid& hgrid, double omega, double intensity) {
  return HeffInterpolator(hgrid).heff(omega, intensity);
}

double find_balanced_omega(const AtomModel& atom, const PartitionPolicy& policy, double intensity,
                           double omega_guess, double tolerance, int max_iterations) {
  double omega = omega_guess;
  for (int it = 0; it < max_iterations; ++it) {
    const EffhamBundle b = effham_at(atom, policy, omega, intensity);
    const double step = (b.h1.matrix(1, 1) - b.h1.matrix(0, 0)).real() / policy.order;
    omega += step;
    if (!(omega > 0.0)) throw NumericalError("resonance iteration left the positive frequency axis");
    if (std::abs(step) < tolerance) return omega;
  }
  throw NumericalError("resonance iteration did not converge in " + std::to_string(max_iterations) + " steps");
}

double peak_excited_population(const HeffInterpolator& interp, double omega, double intensity) {
  const DressedStates d = dressed_diagonalize(interp.heff(omega, intensity));
  return max_excited_population(d, default_t_max(d)).value;
}

Resonance dressed_resonance(const HeffInterpolator& interp, double intensity) {
  const auto& omegas = interp.grid().omegas;
  if (omegas.size() < 2) throw InvalidInput("resonance search needs at least two omega nodes");
  const double lo = omegas.front(), hi = omegas.back();
  auto f = [&](double w) { return peak_excited_population(interp, w, intensity); };
  auto balance = [&](double w) {
    const Eigen::Matrix2cd h = interp.heff(w, intensity).matrix;
    return (h(0, 0) - h(1, 1)).real();
  };

  // Coarse sampling plus every root of the real detuning as candidates.
  const std::vector<double> coarse = linspace(lo, hi, kCoarseSamples);
  std::vector<double> candidates = coarse;
  double prev = balance(coarse.front());
  for (std::size_t i = 1; i < coarse.size(); ++i) {
    const double cur = balance(coarse[i]);
    if ((prev < 0.0) != (cur < 0.0)) {
      double a = coarse[i - 1], b = coarse[i], fa = prev;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = balance(m);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      candidates.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  double best = candidates.front(), best_value = -1.0;
  for (double w : candidates) {
    const double v = f(w);
    if (v > best_value) {
      best_value = v;
      best = w;
    }
  }
  const double spacing = coarse[1] - coarse[0];
  double w = golden_max(f, std::max(lo, best - spacing), std::min(hi, best + spacing), 1e-14 * hi);

  // Polish: bisection on the centred-difference derivative.
  const double h = kResonanceFdStep;
  auto deriv = [&](double x) { return (f(x + h) - f(x - h)) / (2.0 * h); };
  double a = w - 10.0 * h, b = w + 10.0 * h;
  if (a - h >= lo && b + h <= hi) {
    double da = deriv(a), db = deriv(b);
    if (da > 0.0 && db < 0.0) {
      for (int it = 0; it < 80 && b - a > 1e-15 * hi; ++it) {
        const double m = 0.5 * (a + b);
        const double dm = deriv(m);
        if (dm > 0.0) a = m;
        else b = m;
      }
      w = 0.5 * (a + b);
    }
  }
  if (w - lo < 2.0 * h || hi - w < 2.0 * h) {
    throw NumericalError("dressed resonance at I = " + format_number(intensity) +
                         " W/cm^2 lies on the omega boundary of the grid; widen the grid");
  }

  Resonance r{intensity, w, f(w), kNaN};
  const double half = 0.5 * r.max_pop;
  auto edge = [&](double dir) {
    double inner = w, step = std::max(1e-9, 1e-6 * w);
    double outer = w + dir * step;
    while (true) {
      if (outer < lo || outer > hi) return kNaN;
      if (f(outer) < half) break;
      inner = outer;
      step *= 2.0;
      outer = w + dir * step;
    }
    for (int it = 0; it < 80; ++it) {
      const double m = 0.5 * (inner + outer);
      if (f(m) < half) outer = m;
      else inner = m;
    }
    return 0.5 * (inner + outer);
  };
  const double left = edge(-1.0), right = edge(1.0);
  if (std::isfinite(left) && std::isfinite(right)) r.width = right - left;
  return r;
}

Resonance dressed_resonance(const HeffGrid& hgrid, double intensity) {
  return dressed_resonance(HeffInterpolator(hgrid), intensity);
}

std::vector<RegimeCell> regime_map(const HeffGrid& hgrid) {
  std::vector<RegimeCell> out;
  out.reserve(hgrid.nodes.size());
  for (std::size_t i = 0; i < hgrid.grid.omegas.size(); ++i) {
    for (std::size_t j = 0; j < hgrid.grid.intensities.size(); ++j) {
      const HeffNode& node = hgrid.node(i, j);
      RegimeCell cell{hgrid.grid.omegas[i], hgrid.grid.intensities[j], kNaN, kNaN, kNaN, false};
      if (node.valid) {
        try {
          const DressedStates d = dressed_diagonalize(node.h1);
          const PeakPopulation peak = max_excited_population(d, default_t_max(d));
          cell.zeta = damping_ratio(node.h1, -1.0);
          cell.max_pop = peak.value;
          cell.m_max = 4.0 * std::abs(node.cr.lambda_sum.real()) * peak.value;
          cell.valid = true;
        } catch (const NumericalError&) {
          cell = RegimeCell{hgrid.grid.omegas[i], hgrid.grid.intensities[j], kNaN, kNaN, kNaN, false};
        }
      }
      out.push_back(cell);
    }
  }
  return out;
}

RidgeMap ridge_map(const HeffGrid& hgrid, const std::vector<double>& intensities, double t_max, int samples) {
  const HeffInterpolator interp(hgrid);
  RidgeMap map;
  map.times = linspace(0.0, t_max, samples);
  for (double intensity : intensities) {
    const Resonance r = dressed_resonance(interp, intensity);
    map.ridge.push_back(r);
    const DressedStates d = dressed_diagonalize(interp.heff(r.omega_max, intensity));
    std::vector<double> row;
    row.reserve(map.times.size());
    for (double t : map.times) row.push_back(std::norm(cycle_averaged_amplitudes(d, t).second));
    map.pop_excited.push_back(std::move(row));
  }
  return map;
}

namespace {

nlohmann::json cjson(cd z) { return {{"re", z.real()}, {"im", z.imag()}}; }

cd cfrom(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("H_eff grid: missing field '") + key + "'");
  return {j.at(key).at("re").get<double>(), j.at(key).at("im").get<double>()};
}

}  // namespace

nlohmann::json heff_grid_to_json(const HeffGrid& hgrid) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const HeffNode& n : hgrid.nodes) {
    nlohmann::json j{{"valid", n.valid},
                     {"heff", heff_to_json(n.h1)},
                     {"lambda_0", cjson(n.cr.lambda_0)},
                     {"lambda_m4", cjson(n.cr.lambda_m4)},
                     {"chi_ground_norm", n.chi_ground_norm},
                     {"correction_norm", n.correction_norm},
                     {"pole_distance", n.pole_distance}};
    if (!n.error.empty()) j["error"] = n.error;
    nodes.push_back(std::move(j));
  }
  const PhotonWindow w = hgrid.policy.resolved_window();
  return {{"omegas_au", hgrid.grid.omegas},
          {"intensities_wcm2", hgrid.grid.intensities},
          {"policy",
           {{"ground_level", hgrid.policy.ground_level},
            {"excited_level", hgrid.policy.excited_level},
            {"order", hgrid.policy.order},
            {"k_min", w.k_min},
            {"k_max", w.k_max}}},
          {"nodes", std::move(nodes)}};
}

HeffGrid heff_grid_from_json(const nlohmann::json& doc) {
  try {
    HeffGrid g;
    g.grid.omegas = doc.at("omegas_au").get<std::vector<double>>();
    g.grid.intensities = doc.at("intensities_wcm2").get<std::vector<double>>();
    g.grid.validate();
    const auto& p = doc.at("policy");
    g.policy.ground_level = p.at("ground_level").get<int>();
    g.policy.excited_level = p.at("excited_level").get<int>();
    g.policy.order = p.at("order").get<int>();
    g.policy.window = PhotonWindow{p.at("k_min").get<int>(), p.at("k_max").get<int>()};
    const auto& nodes = doc.at("nodes");
    if (!nodes.is_array() || nodes.size() != g.grid.size()) {
      throw InvalidInput("H_eff grid: node count does not match the axes");
    }
    for (const auto& j : nodes) {
      HeffNode n;
      n.valid = j.at("valid").get<bool>();
      n.h1 = heff_from_json(j.at("heff"));
      n.cr.lambda_0 = cfrom(j, "lambda_0");
      n.cr.lambda_m4 = cfrom(j, "lambda_m4");
      n.cr.lambda_sum = n.cr.lambda_0 + n.cr.lambda_m4;
      n.chi_ground_norm = j.value("chi_ground_norm", 0.0);
      n.correction_norm = j.value("correction_norm", 0.0);
      n.pole_distance = j.value("pole_distance", 0.0);
      n.error = j.value("error", "");
      g.nodes.push_back(std::move(n));
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("H_eff grid: malformed JSON: ") + e.what());
  }
}

void write_regime_csv(std::ostream& out, const std::vector<RegimeCell>& cells) {
  out << "omega_au,intensity_wcm2,zeta,max_pop_excited,m_max,valid\n";
  for (const auto& c : cells) {
    out << format_number(c.omega) << ',' << format_number(c.intensity) << ',' << format_number(c.zeta) << ','
        << format_number(c.max_pop) << ',' << format_number(c.m_max) << ',' << (c.valid ? 1 : 0) << '\n';
  }
}

void write_resonance_csv(std::ostream& out, const std::vector<Resonance>& rows) {
  out << "intensity_wcm2,omega_max_au,width_au\n";
  for (const auto& r : rows) {
    out << format_number(r.intensity) << ',' << format_number(r.omega_max) << ',' << format_number(r.width) << '\n';
  }
}

void write_ridge_csv(std::ostream& out, const RidgeMap& map) {
  out << "intensity_wcm2,omega_max_au,t_au,pop_excited\n";
  for (std::size_t i = 0; i < map.ridge.size(); ++i) {
    for (std::size_t k = 0; k < map.times.size(); ++k) {
      out << format_number(map.ridge[i].intensity) << ',' << format_number(map.ridge[i].omega_max) << ','
          << format_number(map.times[k]) << ',' << format_number(map.pop_excited[i][k]) << '\n';
    }
  }
}

}  // namespace crosc

namespace crosc {

namespace {

CsvTable expect_table(std::istream& in, const std::vector<std::string>& header, const char* what) {
  CsvTable t = read_csv_table(in);
  if (t.header != header) throw InvalidInput(std::string(what) + " CSV: unexpected header");
  return t;
}

}  // namespace

std::vector<RegimeCell> read_regime_csv(std::istream& in) {
  const CsvTable t =
      expect_table(in, {"omega_au", "intensity_wcm2", "zeta", "max_pop_excited", "m_max", "valid"}, "regime");
  std::vector<RegimeCell> out;
  for (const auto& r : t.rows) {
    RegimeCell c;
    c.omega = parse_csv_number(r[0]);
    c.intensity = parse_csv_number(r[1]);
    c.zeta = parse_csv_number(r[2]);
    c.max_pop = parse_csv_number(r[3]);
    c.m_max = parse_csv_number(r[4]);
    if (r[5] != "0" && r[5] != "1") throw InvalidInput("regime CSV: valid must be 0 or 1");
    c.valid = r[5] == "1";
    out.push_back(c);
  }
  return out;
}

std::vector<Resonance> read_resonance_csv(std::istream& in) {
  const CsvTable t = expect_table(in, {"intensity_wcm2", "omega_max_au", "width_au"}, "resonance");
  std::vector<Resonance> out;
  for (const auto& r : t.rows) {
    Resonance res;
    res.intensity = parse_csv_number(r[0]);
    res.omega_max = parse_csv_number(r[1]);
    res.width = parse_csv_number(r[2]);
    out.push_back(res);
  }
  return out;
}

}  // namespace crosc
