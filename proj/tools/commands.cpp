#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "crosc/atom_model.hpp"
#include "crosc/dynamics.hpp"
#include "crosc/effham.hpp"
#include "crosc/error.hpp"
#include "crosc/floquet.hpp"
#include "crosc/scan.hpp"
#include "crosc/series.hpp"
#include "crosc/softcore.hpp"
#include "crosc/svg.hpp"
#include "crosc/tdse.hpp"
#include "crosc/units.hpp"

namespace crosc::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string model;
  std::string preset;
  std::string out_dir = ".";
  int workers = 1;
  std::string format = "csv";
  bool svg = false;
};

struct LevelOptions {
  std::string ground = "0";
  std::string excited = "1";
  int order = 2;
  std::optional<int> k_min;
  std::optional<int> k_max;
};

struct FieldOptions {
  std::string file;
  std::optional<double> omega_ev;
  std::optional<double> omega_au;
  std::optional<double> intensity;
  std::optional<double> e0_au;
  std::string envelope = "rect";
  double fwhm_fs = 0.0;
  double phase = 0.0;
  bool resonant = false;
};

struct RunOptions {
  double cycles = 0.0;
  double t_max_fs = 0.0;
  int steps_per_cycle = 400;
  bool no_tdse = false;
  std::size_t max_rows = 20000;
  std::string dump_floquet;
  int adiabatic_nodes = 9;
  double first_cycles = 5.0;
};

struct GridOptions {
  std::optional<double> omega_min_au, omega_max_au, omega_min_ev, omega_max_ev;
  int omega_count = 10;
  double intensity_min = 1e13;
  double intensity_max = 1e14;
  int intensity_count = 10;
  double max_correction = ValidityThresholds{}.max_correction;
  double min_pole_distance = ValidityThresholds{}.min_pole_distance;
  std::string heff_grid;
  std::vector<double> intensities;
  int ridge_samples = 200;
};

struct SoftcoreOptions {
  std::string preset;
  bool softcore = false;
  GridSpec grid;
  int n_keep = 100;
  std::string absorber = "first-order";
  std::string output;
};

// Stage label reported with any error.
struct Context {
  std::string stage;
};

json cjson(cd z) { return {{"re", z.real()}, {"im", z.imag()}}; }

AtomModel preset_model(const std::string& name) {
  if (name == "two-level") return two_level_model();
  if (name == "ladder5") return ladder5_model();
  if (name == "helium-like") return helium_like_model();
  throw UsageError("unknown preset '" + name + "' (two-level, ladder5, helium-like)");
}

AtomModel resolve_model(const Globals& g) {
  if (!g.model.empty() && !g.preset.empty()) throw UsageError("give either --model or --preset, not both");
  if (!g.model.empty()) return load_atom_model(g.model);
  if (!g.preset.empty()) return preset_model(g.preset);
  throw UsageError("a model is required (--model FILE or --preset NAME)");
}

int resolve_level(const AtomModel& atom, const std::string& spec) {
  if (!spec.empty() && std::all_of(spec.begin(), spec.end(), [](char c) { return std::isdigit(c); })) {
    const int i = std::stoi(spec);
    if (i >= static_cast<int>(atom.size())) throw UsageError("level index " + spec + " outside the model");
    return i;
  }
  return static_cast<int>(atom.index_of(spec));
}

PartitionPolicy make_policy(const AtomModel& atom, const LevelOptions& lv) {
  PartitionPolicy p;
  p.ground_level = resolve_level(atom, lv.ground);
  p.excited_level = resolve_level(atom, lv.excited);
  if (p.ground_level == p.excited_level) throw UsageError("ground and excited levels must differ");
  if (lv.order < 1) throw UsageError("--order must be positive");
  p.order = lv.order;
  if (lv.k_min || lv.k_max) {
    const PhotonWindow d = default_window(lv.order);
    p.window = PhotonWindow{lv.k_min.value_or(d.k_min), lv.k_max.value_or(d.k_max)};
  }
  return p;
}

double bare_resonance(const AtomModel& atom, const PartitionPolicy& p) {
  return (atom.level(p.excited_level).energy - atom.level(p.ground_level).energy).real() / p.order;
}

LaserField resolve_field(const FieldOptions& f, const AtomModel& atom, const PartitionPolicy& policy,
                         Context& ctx) {
  LaserField field;
  if (!f.file.empty()) {
    field = load_laser_field(f.file);
  } else {
    if (f.omega_ev && f.omega_au) throw UsageError("give --omega-ev or --omega-au, not both");
    if (f.intensity && f.e0_au) throw UsageError("give --intensity or --e0-au, not both");
    if (!f.intensity && !f.e0_au) throw UsageError("a field strength is required (--intensity or --e0-au)");
    field.e0 = f.e0_au ? *f.e0_au : units::intensity_to_field(*f.intensity);
    if (f.omega_au) field.omega = *f.omega_au;
    else if (f.omega_ev) field.omega = units::ev_to_au(*f.omega_ev);
    else if (f.resonant) field.omega = bare_resonance(atom, policy);
    else throw UsageError("a photon energy is required (--omega-ev, --omega-au or --resonant)");
    if (f.envelope == "gaussian") {
      field.envelope = EnvelopeKind::kGaussian;
      field.fwhm = units::fs_to_au(f.fwhm_fs);
    } else if (f.envelope != "rect") {
      throw UsageError("--envelope must be rect or gaussian");
    }
    field.phase = f.phase;
  }
  if (f.resonant) {
    ctx.stage = "effham: balancing omega at I0 = " + format_number(units::field_to_intensity(field.e0)) + " W/cm^2";
    field.omega = find_balanced_omega(atom, policy, units::field_to_intensity(field.e0), field.omega);
  }
  field.validate();
  return field;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

fs::path prepare_out_dir(const Globals& g) {
  const fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidInput("cannot create output directory " + g.out_dir);
  return dir;
}

json csv_to_json(const std::string& csv) {
  std::istringstream in(csv);
  const CsvTable t = read_csv_table(in);
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::object();
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i].empty()) {
        row[t.header[i]] = nullptr;
        continue;
      }
      try {
        const double v = parse_csv_number(r[i]);
        row[t.header[i]] = std::isfinite(v) ? json(v) : json(nullptr);
      } catch (const InvalidInput&) {
        row[t.header[i]] = r[i];
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Writes name.csv or name.json depending on --format; returns the file name.
std::string emit_table(const Globals& g, const fs::path& dir, const std::string& name, const std::string& csv) {
  if (g.format == "json") {
    write_file(dir / (name + ".json"), csv_to_json(csv).dump(1) + "\n");
    return name + ".json";
  }
  write_file(dir / (name + ".csv"), csv);
  return name + ".csv";
}

PopulationSeries decimate(const PopulationSeries& s, std::size_t max_rows) {
  if (max_rows == 0 || s.size() <= max_rows) return s;
  const std::size_t stride = (s.size() + max_rows - 1) / max_rows;
  PopulationSeries out;
  out.source = s.source;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i % stride != 0 && i + 1 != s.size()) continue;
    out.times.push_back(s.times[i]);
    out.pop_ground.push_back(s.pop_ground[i]);
    out.pop_excited.push_back(s.pop_excited[i]);
    if (s.has_envelopes()) {
      out.envelope_lo.push_back(s.envelope_lo[i]);
      out.envelope_hi.push_back(s.envelope_hi[i]);
    }
    out.norm.push_back(s.norm[i]);
  }
  return out;
}

std::string series_csv(const std::vector<PopulationSeries>& series, std::size_t max_rows) {
  std::vector<PopulationSeries> cut;
  for (const auto& s : series) cut.push_back(decimate(s, max_rows));
  std::ostringstream os;
  write_series_csv(os, cut);
  return os.str();
}

void series_svg(const fs::path& path, const std::vector<PopulationSeries>& series, std::size_t max_rows) {
  static const char* colors[] = {"#000000", "#d62728", "#1f77b4", "#2ca02c"};
  std::vector<svg::Line> lines;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const PopulationSeries s = decimate(series[i], std::min<std::size_t>(max_rows, 4000));
    svg::Line l;
    for (double t : s.times) l.x.push_back(units::au_to_fs(t));
    l.y = s.pop_excited;
    l.color = colors[i % 4];
    l.label = s.source;
    lines.push_back(std::move(l));
  }
  std::ofstream out(path);
  svg::line_plot(out, lines, "excited-state population", "t (fs)", "population");
}

json level_json(const AtomModel& atom, int i) { return {{"index", i}, {"label", atom.level(i).label}}; }

// ---------------------------------------------------------------- build-model

int cmd_build_model(const SoftcoreOptions& o, std::ostream& out, Context& ctx) {
  if (o.output.empty()) throw UsageError("build-model: -o/--output is required");
  if (o.softcore == !o.preset.empty()) throw UsageError("build-model: give exactly one of --preset or --softcore");
  AtomModel atom = two_level_model();
  if (o.softcore) {
    AbsorberTreatment t = AbsorberTreatment::kFirstOrder;
    if (o.absorber == "exact") t = AbsorberTreatment::kExact;
    else if (o.absorber != "first-order") throw UsageError("--absorber must be first-order or exact");
    ctx.stage = "atom_model: soft-core grid (" + std::to_string(o.grid.points) + " points, extent " +
                format_number(o.grid.extent) + ")";
    atom = build_softcore_model(o.grid, o.n_keep, t);
  } else {
    atom = preset_model(o.preset);
  }
  save_atom_model(atom, o.output);
  out << "wrote " << o.output << " (" << atom.size() << " levels)\n";
  return kOk;
}

// ---------------------------------------------------------------- analyze / compare

struct PointAnalysis {
  LaserField field;
  double intensity = 0.0;
  PartitionPolicy policy;
  Partition partition;
  EffhamBundle bundle;
  DressedStates dressed;
  CRAmplitudes cr;
  Eigen::Index dimension = 0;
  double t_end = 0.0;
  PeakPopulation peak;
  double m_max = 0.0;
};

PointAnalysis analyze_point(const AtomModel& atom, const PartitionPolicy& policy, const LaserField& field,
                            const RunOptions& run, Context& ctx) {
  PointAnalysis a;
  a.field = field;
  a.policy = policy;
  a.intensity = units::field_to_intensity(field.e0);
  ctx.stage = "effham: omega = " + format_number(field.omega) + " au, I0 = " + format_number(a.intensity) +
              " W/cm^2, window [" + std::to_string(policy.resolved_window().k_min) + ", " +
              std::to_string(policy.resolved_window().k_max) + "]";
  a.bundle = effham_at(atom, policy, field.omega, a.intensity, &a.partition);
  a.dimension = static_cast<Eigen::Index>(atom.size()) * policy.resolved_window().blocks();
  ctx.stage = "dynamics: dressed states at omega = " + format_number(field.omega) + " au";
  a.dressed = dressed_diagonalize(a.bundle.h1);
  a.cr = cr_amplitudes(a.bundle.chi, a.partition);
  const double period = field.period();
  if (run.t_max_fs > 0.0) a.t_end = units::fs_to_au(run.t_max_fs);
  else if (run.cycles > 0.0) a.t_end = run.cycles * period;
  else {
    const double t = default_t_max(a.dressed);
    a.t_end = std::isfinite(t) ? std::min(t, 5000.0 * period) : 100.0 * period;
    a.t_end = std::max(a.t_end, 2.0 * period);
  }
  a.peak = max_excited_population(a.dressed, a.t_end);
  a.m_max = 4.0 * std::abs(a.cr.lambda_sum.real()) * a.peak.value;
  return a;
}

json point_summary(const AtomModel& atom, const PointAnalysis& a) {
  const auto& h = a.bundle.h1.matrix;
  double zeta = kNaN;
  bool resonant = false;
  try {
    zeta = damping_ratio(h, -1.0);
    damping_ratio(h);
    resonant = true;
  } catch (const Error&) {
    // zeta stays NaN without coupling; off resonance it is reported unflagged
  }
  const PhotonWindow w = a.policy.resolved_window();
  return {
      {"omega_au", a.field.omega},
      {"omega_ev", units::au_to_ev(a.field.omega)},
      {"intensity_wcm2", a.intensity},
      {"e0_au", a.field.e0},
      {"order", a.policy.order},
      {"ground", level_json(atom, a.policy.ground_level)},
      {"excited", level_json(atom, a.policy.excited_level)},
      {"photon_window", {w.k_min, w.k_max}},
      {"floquet_dimension", a.dimension},
      {"e_ref", cjson(a.bundle.h1.e_ref)},
      {"heff0", heff_to_json(a.bundle.h0)},
      {"heff1", heff_to_json(a.bundle.h1)},
      {"lambda_plus", cjson(a.dressed.lambda_plus)},
      {"lambda_minus", cjson(a.dressed.lambda_minus)},
      {"rabi_period_au", rabi_period(a.dressed)},
      {"Lambda_0", cjson(a.cr.lambda_0)},
      {"Lambda_m4", cjson(a.cr.lambda_m4)},
      {"Lambda", cjson(a.cr.lambda_sum)},
      {"max_pop_excited", a.peak.value},
      {"t_peak_au", a.peak.time},
      {"m_max", a.m_max},
      {"interference_bound", interference_bound(a.cr, a.peak.value)},
      {"zeta", zeta},
      {"resonant", resonant},
      {"chi_ground_norm", a.bundle.chi.matrix.col(0).norm()},
      {"correction_norm", a.bundle.c.matrix.cwiseAbs().maxCoeff()},
      {"pole_distance", std::abs(a.bundle.h0.e_ref - a.bundle.nearest_pole)},
      {"t_max_au", a.t_end},
  };
}

TdseResult run_tdse(const AtomModel& atom, const PointAnalysis& a, const RunOptions& run, double t_start,
                    Context& ctx) {
  PropagatorConfig cfg;
  cfg.steps_per_cycle_min = run.steps_per_cycle;
  cfg.t_start = t_start;
  cfg.t_max = a.t_end;
  ctx.stage = "tdse: " + std::to_string(atom.size()) + " levels, t in [" + format_number(t_start) + ", " +
              format_number(a.t_end) + "] au";
  return propagate(atom, a.field, cfg, a.policy.ground_level, a.policy.excited_level);
}

json depth_summary(const TdseResult& r, const PointAnalysis& a, double t0, double t1) {
  json j{{"steps", r.series.size() - 1}, {"max_local_error", r.max_local_error}, {"final_norm", r.series.norm.back()}};
  if (t1 - t0 >= 2.0 * a.field.period()) {
    const double ex = modulation_depth(r.series, LevelSelector::kExcited, t0, t1, a.field.omega);
    const double gr = modulation_depth(r.series, LevelSelector::kGround, t0, t1, a.field.omega);
    j["excited_depth"] = ex;
    j["ground_depth"] = gr;
    j["ground_over_excited_depth"] = ex > 0.0 ? gr / ex : kNaN;
    j["excited_depth_over_m_max"] = a.m_max > 0.0 ? ex / a.m_max : kNaN;
  }
  return j;
}

// Adiabatic following of the interpolated H_eff(I(t)) for a Gaussian pulse.
PopulationSeries adiabatic_series(const HeffInterpolator& interp, const LaserField& field, double intensity,
                                  const std::vector<double>& times) {
  PopulationSeries s;
  s.source = "effham_adiabatic";
  Eigen::Vector2cd c(1.0, 0.0);
  auto record = [&](double t) {
    const double i_t = std::min(intensity, intensity * field.intensity_envelope(t));
    const CRAmplitudes cr = interp.cr(field.omega, i_t);
    const double b2 = std::norm(c(1));
    const double base = 1.0 + std::norm(cr.lambda_0) + std::norm(cr.lambda_m4);
    const double swing = 2.0 * cr.lambda_sum.real();
    s.times.push_back(t);
    s.pop_ground.push_back(std::norm(c(0)));
    s.pop_excited.push_back(b2 * (base + swing * std::cos(2.0 * field.omega * t)));
    s.envelope_lo.push_back(b2 * (base - std::abs(swing)));
    s.envelope_hi.push_back(b2 * (base + std::abs(swing)));
    s.norm.push_back(c.squaredNorm());
  };
  record(times.front());
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    const double tm = 0.5 * (times[k] + times[k - 1]);
    const double i_t = std::min(intensity, intensity * field.intensity_envelope(tm));
    const Eigen::Matrix2cd h = interp.heff(field.omega, i_t).matrix;
    c = linalg::expm2(cd{0.0, -dt} * h) * c;
    record(times[k]);
  }
  return s;
}

int analyze_gaussian(const AtomModel& atom, const Globals& g, const PartitionPolicy& policy, const LaserField& field,
                     const RunOptions& run, std::ostream& out, Context& ctx) {
  const double intensity = units::field_to_intensity(field.e0);
  if (run.adiabatic_nodes < 4) throw UsageError("--adiabatic-nodes must be at least 4");
  ParamGrid grid;
  const double dw = 1e-3 * field.omega;
  grid.omegas = {field.omega - 2 * dw, field.omega - dw, field.omega + dw, field.omega + 2 * dw};
  grid.intensities = linspace(0.0, intensity, run.adiabatic_nodes);
  ctx.stage = "scan: H_eff(I) grid for adiabatic following, I0 = " + format_number(intensity) + " W/cm^2";
  // Only hard failures stop the run; the mask thresholds are reported instead.
  const HeffGrid hgrid =
      scan_heff(atom, grid, policy, g.workers, {std::numeric_limits<double>::infinity(), 0.0});
  double max_correction = 0.0;
  for (const auto& n : hgrid.nodes) {
    if (!n.valid) throw NumericalError("H_eff node failed: " + n.error);
    max_correction = std::max(max_correction, n.correction_norm);
  }
  const HeffInterpolator interp(hgrid);

  const double half = run.t_max_fs > 0.0 ? units::fs_to_au(run.t_max_fs) : 1.5 * field.fwhm;
  PointAnalysis a;
  a.field = field;
  a.policy = policy;
  a.intensity = intensity;
  a.t_end = half;

  std::vector<PopulationSeries> series;
  std::vector<double> times;
  json tdse_json = nullptr;
  if (!run.no_tdse) {
    TdseResult r = run_tdse(atom, a, run, -half, ctx);
    tdse_json = json{{"steps", r.series.size() - 1},
                     {"max_local_error", r.max_local_error},
                     {"final_norm", r.series.norm.back()},
                     {"final_excited", r.series.pop_excited.back()}};
    times = r.series.times;
    series.push_back(std::move(r.series));
  } else {
    const long n = static_cast<long>(std::ceil(2.0 * half / field.period() * run.steps_per_cycle));
    for (long k = 0; k <= n; ++k) times.push_back(-half + 2.0 * half * k / n);
  }
  ctx.stage = "dynamics: adiabatic H_eff(I(t)) propagation";
  series.push_back(adiabatic_series(interp, field, intensity, times));

  const fs::path dir = prepare_out_dir(g);
  const std::string name = emit_table(g, dir, "series", series_csv(series, run.max_rows));
  json summary{{"command", "analyze"},
               {"envelope", "gaussian"},
               {"fwhm_fs", units::au_to_fs(field.fwhm)},
               {"omega_au", field.omega},
               {"omega_ev", units::au_to_ev(field.omega)},
               {"intensity_wcm2", intensity},
               {"e0_au", field.e0},
               {"order", policy.order},
               {"ground", level_json(atom, policy.ground_level)},
               {"excited", level_json(atom, policy.excited_level)},
               {"t_range_au", {-half, half}},
               {"effective_side",
                "approximation: adiabatic following of H_eff^(1)(I(t)) interpolated on " +
                    std::to_string(run.adiabatic_nodes) + " intensity nodes, piecewise exact 2x2 exponentials"},
               {"final_excited_effective", series.back().pop_excited.back()},
               {"max_correction_norm", max_correction},
               {"within_validity_thresholds", max_correction <= ValidityThresholds{}.max_correction},
               {"tdse", tdse_json},
               {"series_file", name}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  if (g.svg) series_svg(dir / "series.svg", series, run.max_rows);
  out << "analyze: gaussian pulse, " << series.front().size() << " samples -> " << (dir / name).string() << "\n";
  return kOk;
}

int cmd_analyze(const Globals& g, const LevelOptions& lv, const FieldOptions& fo, const RunOptions& run,
                std::ostream& out, Context& ctx) {
  const AtomModel atom = resolve_model(g);
  const PartitionPolicy policy = make_policy(atom, lv);
  const LaserField field = resolve_field(fo, atom, policy, ctx);
  if (field.envelope == EnvelopeKind::kGaussian) return analyze_gaussian(atom, g, policy, field, run, out, ctx);

  const PointAnalysis a = analyze_point(atom, policy, field, run, ctx);
  const fs::path dir = prepare_out_dir(g);
  if (!run.dump_floquet.empty()) {
    const PhotonWindow w = policy.resolved_window();
    std::ofstream tri(dir / run.dump_floquet);
    write_triplets(FloquetMatrix(atom, field, w), tri);
  }

  std::vector<PopulationSeries> series;
  std::vector<double> times;
  json summary = point_summary(atom, a);
  summary["command"] = "analyze";
  summary["envelope"] = "rect";
  if (!run.no_tdse) {
    TdseResult r = run_tdse(atom, a, run, 0.0, ctx);
    summary["tdse"] = depth_summary(r, a, 0.0, a.t_end);
    times = r.series.times;
    series.push_back(std::move(r.series));
  } else {
    const long n = static_cast<long>(std::ceil(a.t_end / field.period() * run.steps_per_cycle));
    for (long k = 0; k <= n; ++k) times.push_back(a.t_end * k / n);
  }
  ctx.stage = "dynamics: effective-side series";
  EffectiveSeries eff = effective_series(a.dressed, a.bundle.chi, a.partition, field.omega, times);
  series.push_back(std::move(eff.compact));
  series.push_back(std::move(eff.full));

  const std::string name = emit_table(g, dir, "series", series_csv(series, run.max_rows));
  summary["series_file"] = name;
  write_file(dir / "heff.json", json{{"heff0", heff_to_json(a.bundle.h0)}, {"heff1", heff_to_json(a.bundle.h1)}}.dump(2) + "\n");
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  if (g.svg) series_svg(dir / "series.svg", series, run.max_rows);
  out << "analyze: omega = " << format_number(field.omega) << " au, M_max = " << format_number(a.m_max)
      << ", zeta = " << format_number(summary["zeta"].is_number() ? summary["zeta"].get<double>() : kNaN) << " -> "
      << (dir / name).string() << "\n";
  return kOk;
}

int cmd_compare(const Globals& g, const LevelOptions& lv, const FieldOptions& fo, const RunOptions& run,
                std::ostream& out, Context& ctx) {
  const AtomModel atom = resolve_model(g);
  const PartitionPolicy policy = make_policy(atom, lv);
  const LaserField field = resolve_field(fo, atom, policy, ctx);
  if (field.envelope != EnvelopeKind::kRectangular) throw UsageError("compare needs a rectangular envelope");
  const PointAnalysis a = analyze_point(atom, policy, field, run, ctx);
  TdseResult r = run_tdse(atom, a, run, 0.0, ctx);
  const auto& t = r.series.times;
  ctx.stage = "dynamics: effective-side series";
  EffectiveSeries eff = effective_series(a.dressed, a.bundle.chi, a.partition, field.omega, t);

  const double window = run.first_cycles * field.period();
  const double bound = interference_bound(a.cr, a.peak.value);
  double eq4_err = 0.0, eq5_err = 0.0, env_excess = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double p = r.series.pop_excited[k];
    if (t[k] <= window + 1e-9) {
      eq4_err = std::max(eq4_err, std::abs(eff.full.pop_excited[k] - p));
      eq5_err = std::max(eq5_err, std::abs(eff.compact.pop_excited[k] - p));
    }
    env_excess = std::max({env_excess, eff.compact.envelope_lo[k] - p, p - eff.compact.envelope_hi[k]});
  }
  json summary = point_summary(atom, a);
  summary["command"] = "compare";
  summary["tdse"] = depth_summary(r, a, 0.0, a.t_end);
  summary["first_cycles"] = run.first_cycles;
  summary["eq4_max_error"] = eq4_err;
  summary["eq4_error_over_m_max"] = a.m_max > 0.0 ? eq4_err / a.m_max : kNaN;
  summary["eq5_max_error"] = eq5_err;
  summary["eq5_error_over_m_max"] = a.m_max > 0.0 ? eq5_err / a.m_max : kNaN;
  summary["envelope_excess"] = env_excess;
  // The envelopes drop the L0/L4 interference; the TDSE may also drift from
  // the full sideband sum by the point-wise tolerance over a long run.
  const double slack = bound + 0.1 * a.m_max;
  summary["envelope_slack"] = slack;
  summary["envelope_within_slack"] = env_excess <= slack;

  const fs::path dir = prepare_out_dir(g);
  std::vector<PopulationSeries> series{std::move(r.series), std::move(eff.compact), std::move(eff.full)};
  summary["series_file"] = emit_table(g, dir, "series", series_csv(series, run.max_rows));
  write_file(dir / "compare.json", summary.dump(2) + "\n");
  if (g.svg) series_svg(dir / "series.svg", series, run.max_rows);
  out << "compare: sideband-sum error / M_max over " << format_number(run.first_cycles)
      << " cycles = " << format_number(summary["eq4_error_over_m_max"].get<double>()) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- scan / resonance

ParamGrid resolve_grid(const AtomModel& atom, const PartitionPolicy& policy, const GridOptions& o) {
  const double bare = bare_resonance(atom, policy);
  double lo = 0.98 * bare, hi = 1.02 * bare;
  if (o.omega_min_ev) lo = units::ev_to_au(*o.omega_min_ev);
  if (o.omega_max_ev) hi = units::ev_to_au(*o.omega_max_ev);
  if (o.omega_min_au) lo = *o.omega_min_au;
  if (o.omega_max_au) hi = *o.omega_max_au;
  if (o.omega_count < 1 || o.intensity_count < 1) throw UsageError("grid node counts must be positive");
  ParamGrid g;
  g.omegas = o.omega_count == 1 ? std::vector<double>{lo} : linspace(lo, hi, o.omega_count);
  g.intensities = o.intensity_count == 1 ? std::vector<double>{o.intensity_min}
                                         : linspace(o.intensity_min, o.intensity_max, o.intensity_count);
  g.validate();
  return g;
}

struct ResonanceRun {
  std::vector<Resonance> rows;
  json failures = json::array();
};

ResonanceRun resonances(const HeffGrid& hgrid, const std::vector<double>& intensities, std::ostream& err) {
  ResonanceRun out;
  const HeffInterpolator interp(hgrid);
  for (double i0 : intensities) {
    try {
      out.rows.push_back(dressed_resonance(interp, i0));
    } catch (const Error& e) {
      out.rows.push_back({i0, kNaN, kNaN, kNaN});
      out.failures.push_back({{"intensity_wcm2", i0}, {"error", e.what()}});
      err << "resonance at I0 = " << format_number(i0) << " W/cm^2 failed: " << e.what() << "\n";
    }
  }
  return out;
}

bool interpolable(const HeffGrid& hgrid) {
  if (hgrid.failures() > 0) return false;
  try {
    hgrid.grid.validate(true);
  } catch (const InvalidInput&) {
    return false;
  }
  return hgrid.grid.omegas.size() >= 4;
}

int cmd_scan(const Globals& g, const LevelOptions& lv, const GridOptions& o, std::ostream& out, std::ostream& err,
             Context& ctx) {
  const AtomModel atom = resolve_model(g);
  const PartitionPolicy policy = make_policy(atom, lv);
  const ParamGrid grid = resolve_grid(atom, policy, o);
  ctx.stage = "scan: " + std::to_string(grid.omegas.size()) + "x" + std::to_string(grid.intensities.size()) +
              " grid, " + std::to_string(g.workers) + " worker(s)";
  const HeffGrid hgrid = scan_heff(atom, grid, policy, g.workers, {o.max_correction, o.min_pole_distance});
  const fs::path dir = prepare_out_dir(g);
  write_file(dir / "heff_grid.json", heff_grid_to_json(hgrid).dump(1) + "\n");

  const std::vector<RegimeCell> cells = regime_map(hgrid);
  std::ostringstream regime;
  write_regime_csv(regime, cells);
  emit_table(g, dir, "regime", regime.str());

  json failures = json::array();
  for (std::size_t k = 0; k < hgrid.nodes.size(); ++k) {
    const HeffNode& n = hgrid.nodes[k];
    if (n.valid) continue;
    const double w = grid.omegas[k / grid.intensities.size()];
    const double i0 = grid.intensities[k % grid.intensities.size()];
    failures.push_back({{"omega_au", w}, {"intensity_wcm2", i0}, {"error", n.error}});
    err << "node omega = " << format_number(w) << " au, I0 = " << format_number(i0) << " W/cm^2: " << n.error << "\n";
  }

  std::vector<Resonance> rows;
  bool partial = !failures.empty();
  if (interpolable(hgrid)) {
    ctx.stage = "scan: dressed resonance";
    ResonanceRun rr = resonances(hgrid, grid.intensities, err);
    rows = rr.rows;
    for (auto& f : rr.failures) failures.push_back(f);
    partial = partial || !rr.failures.empty();
    if (!rows.empty()) {
      const HeffInterpolator interp(hgrid);
      double t_max = 0.0;
      std::vector<double> ridge_i;
      for (const auto& r : rows) {
        if (!std::isfinite(r.omega_max)) continue;
        t_max = std::max(t_max, default_t_max(dressed_diagonalize(interp.heff(r.omega_max, r.intensity))));
        ridge_i.push_back(r.intensity);
      }
      if (std::isfinite(t_max) && t_max > 0.0) {
        std::ostringstream ridge;
        write_ridge_csv(ridge, ridge_map(hgrid, ridge_i, t_max, o.ridge_samples));
        emit_table(g, dir, "ridge", ridge.str());
      }
    }
  } else {
    // Not an error for small grids: every intensity gets an undetermined row.
    err << "resonance search skipped: the grid is not interpolable (needs >= 4 nodes per axis and no failed nodes)\n";
    for (double i0 : grid.intensities) rows.push_back({i0, kNaN, kNaN, kNaN});
  }
  std::ostringstream res;
  write_resonance_csv(res, rows);
  emit_table(g, dir, "resonance", res.str());
  if (!failures.empty()) write_file(dir / "failures.json", failures.dump(2) + "\n");

  if (g.svg) {
    const std::size_t nw = grid.omegas.size(), ni = grid.intensities.size();
    std::vector<std::vector<double>> pop(nw, std::vector<double>(ni)), zeta = pop;
    for (std::size_t i = 0; i < nw; ++i) {
      for (std::size_t j = 0; j < ni; ++j) {
        pop[i][j] = cells[i * ni + j].max_pop;
        zeta[i][j] = cells[i * ni + j].zeta;
      }
    }
    std::vector<double> w_ev;
    for (double w : grid.omegas) w_ev.push_back(units::au_to_ev(w));
    std::ofstream h1(dir / "max_pop.svg");
    svg::heatmap(h1, w_ev, grid.intensities, pop, "max excited population", "omega (eV)", "I0 (W/cm^2)");
    std::ofstream h2(dir / "zeta.svg");
    svg::heatmap(h2, w_ev, grid.intensities, zeta, "damping ratio", "omega (eV)", "I0 (W/cm^2)");
    if (!rows.empty()) {
      svg::Line l;
      for (const auto& r : rows) {
        if (!std::isfinite(r.omega_max)) continue;
        l.x.push_back(r.intensity);
        l.y.push_back(units::au_to_ev(r.omega_max));
      }
      std::ofstream h3(dir / "resonance.svg");
      svg::line_plot(h3, {l}, "dressed resonance", "I0 (W/cm^2)", "omega_max (eV)");
    }
  }
  const auto found = std::count_if(rows.begin(), rows.end(), [](const Resonance& r) { return std::isfinite(r.omega_max); });
  out << "scan: " << cells.size() << " nodes, " << hgrid.failures() << " failed, " << found
      << " resonance(s) -> " << dir.string() << "\n";
  return partial ? kPartialFailure : kOk;
}

int cmd_resonance(const Globals& g, const LevelOptions& lv, const GridOptions& o, std::ostream& out,
                  std::ostream& err, Context& ctx) {
  HeffGrid hgrid;
  if (!o.heff_grid.empty()) {
    std::ifstream in(o.heff_grid);
    if (!in) throw InvalidInput("cannot open " + o.heff_grid);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw InvalidInput("H_eff grid " + o.heff_grid + ": " + e.what());
    }
    hgrid = heff_grid_from_json(doc);
  } else {
    const AtomModel atom = resolve_model(g);
    const PartitionPolicy policy = make_policy(atom, lv);
    const ParamGrid grid = resolve_grid(atom, policy, o);
    ctx.stage = "scan: H_eff grid for the resonance search";
    hgrid = scan_heff(atom, grid, policy, g.workers, {o.max_correction, o.min_pole_distance});
  }
  if (!interpolable(hgrid)) {
    throw NumericalError("the H_eff grid cannot be interpolated (" + std::to_string(hgrid.failures()) +
                         " failed node(s); cubic interpolation needs >= 4 nodes per axis)");
  }
  ctx.stage = "scan: dressed resonance";
  const std::vector<double>& list = o.intensities.empty() ? hgrid.grid.intensities : o.intensities;
  ResonanceRun rr = resonances(hgrid, list, err);
  const fs::path dir = prepare_out_dir(g);
  std::ostringstream res;
  write_resonance_csv(res, rr.rows);
  const std::string name = emit_table(g, dir, "resonance", res.str());
  if (!rr.failures.empty()) write_file(dir / "failures.json", rr.failures.dump(2) + "\n");
  out << "resonance: " << rr.rows.size() - rr.failures.size() << " of " << list.size() << " intensities -> " << (dir / name).string()
      << "\n";
  return rr.failures.empty() ? kOk : kPartialFailure;
}

// ---------------------------------------------------------------- wiring

void add_level_options(CLI::App* app, LevelOptions& lv) {
  app->add_option("--ground", lv.ground, "ground level (label or index)")->capture_default_str();
  app->add_option("--excited", lv.excited, "excited level (label or index)")->capture_default_str();
  app->add_option("--order", lv.order, "photon order of the transition")->capture_default_str();
  app->add_option("--k-min", lv.k_min, "lowest photon block (default -order-4)");
  app->add_option("--k-max", lv.k_max, "highest photon block (default 4)");
}

void add_field_options(CLI::App* app, FieldOptions& f) {
  app->add_option("--field", f.file, "field JSON file")->check(CLI::ExistingFile);
  app->add_option("--omega-ev", f.omega_ev, "photon energy, eV");
  app->add_option("--omega-au", f.omega_au, "photon energy, hartree");
  app->add_option("--intensity", f.intensity, "peak intensity, W/cm^2");
  app->add_option("--e0-au", f.e0_au, "peak field amplitude, atomic units");
  app->add_option("--envelope", f.envelope, "rect or gaussian")->capture_default_str();
  app->add_option("--fwhm-fs", f.fwhm_fs, "Gaussian intensity FWHM, fs");
  app->add_option("--phase", f.phase, "carrier phase, rad");
  app->add_flag("--resonant", f.resonant, "move omega to the balanced (resonant) frequency of H_eff");
}

void add_run_options(CLI::App* app, RunOptions& r) {
  app->add_option("--cycles", r.cycles, "propagation length in optical cycles");
  app->add_option("--t-max-fs", r.t_max_fs, "propagation length (half-span for pulses), fs");
  app->add_option("--steps-per-cycle", r.steps_per_cycle, "RK4 steps per optical cycle")->capture_default_str();
  app->add_option("--max-rows", r.max_rows, "rows per source in the series output (0 keeps all)")
      ->capture_default_str();
}

void add_grid_options(CLI::App* app, GridOptions& o) {
  app->add_option("--omega-min-au", o.omega_min_au, "lowest photon energy, hartree");
  app->add_option("--omega-max-au", o.omega_max_au, "highest photon energy, hartree");
  app->add_option("--omega-min-ev", o.omega_min_ev, "lowest photon energy, eV");
  app->add_option("--omega-max-ev", o.omega_max_ev, "highest photon energy, eV");
  app->add_option("--omega-count", o.omega_count, "frequency nodes")->capture_default_str();
  app->add_option("--intensity-min", o.intensity_min, "lowest intensity, W/cm^2")->capture_default_str();
  app->add_option("--intensity-max", o.intensity_max, "highest intensity, W/cm^2")->capture_default_str();
  app->add_option("--intensity-count", o.intensity_count, "intensity nodes")->capture_default_str();
  app->add_option("--max-correction", o.max_correction, "mask nodes with max|C| above this")->capture_default_str();
  app->add_option("--min-pole-distance", o.min_pole_distance, "mask nodes this close to a Q-space pole")
      ->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counter-rotating effects in strong-field resonant transitions"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--model", g.model, "atom model JSON file")->check(CLI::ExistingFile);
  app.add_option("--preset", g.preset, "built-in model: two-level, ladder5, helium-like");
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--workers", g.workers, "worker threads for grid scans")->capture_default_str()->check(
      CLI::PositiveNumber);
  app.add_option("--format", g.format, "table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_flag("--svg", g.svg, "also write SVG renderings");

  SoftcoreOptions sc;
  auto* build = app.add_subcommand("build-model", "write an atom model file");
  build->add_option("--preset", sc.preset, "two-level, ladder5 or helium-like");
  build->add_flag("--softcore", sc.softcore, "diagonalize the 1D soft-core atom");
  build->add_option("--points", sc.grid.points, "interior grid points")->capture_default_str();
  build->add_option("--extent", sc.grid.extent, "box half-width, bohr")->capture_default_str();
  build->add_option("--softening", sc.grid.softening, "soft-core parameter a^2")->capture_default_str();
  build->add_option("--cap-start", sc.grid.cap_start, "absorber onset, bohr")->capture_default_str();
  build->add_option("--cap-strength", sc.grid.cap_strength, "absorber height at the box edge")->capture_default_str();
  build->add_option("--n-keep", sc.n_keep, "states to keep")->capture_default_str();
  build->add_option("--absorber", sc.absorber, "first-order or exact")->capture_default_str();
  build->add_option("-o,--output", sc.output, "output JSON file");

  LevelOptions lv;
  FieldOptions fo;
  RunOptions run;
  auto* analyze = app.add_subcommand("analyze", "effective Hamiltonian, dynamics and TDSE at one field point");
  add_level_options(analyze, lv);
  add_field_options(analyze, fo);
  add_run_options(analyze, run);
  analyze->add_flag("--no-tdse", run.no_tdse, "skip the TDSE reference");
  analyze->add_option("--dump-floquet", run.dump_floquet, "write the Floquet matrix triplets to this file");
  analyze->add_option("--adiabatic-nodes", run.adiabatic_nodes, "intensity nodes for Gaussian pulses")
      ->capture_default_str();

  auto* compare = app.add_subcommand("compare", "effective-Hamiltonian populations against the TDSE at one field point");
  add_level_options(compare, lv);
  add_field_options(compare, fo);
  add_run_options(compare, run);
  compare->add_option("--first-cycles", run.first_cycles, "cycles used for the point-wise error")
      ->capture_default_str();

  GridOptions go;
  auto* scan = app.add_subcommand("scan", "H_eff grid, regime map and dressed resonance");
  add_level_options(scan, lv);
  add_grid_options(scan, go);
  scan->add_option("--ridge-samples", go.ridge_samples, "time samples along the resonance ridge")
      ->capture_default_str();

  auto* resonance = app.add_subcommand("resonance", "dressed-resonance frequency and width versus intensity");
  add_level_options(resonance, lv);
  add_grid_options(resonance, go);
  resonance->add_option("--heff-grid", go.heff_grid, "reuse a heff_grid.json written by scan")
      ->check(CLI::ExistingFile);
  resonance->add_option("--at", go.intensities, "intensities to search, W/cm^2 (default: grid nodes)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Context ctx;
  try {
    if (build->parsed()) return cmd_build_model(sc, out, ctx);
    if (analyze->parsed()) return cmd_analyze(g, lv, fo, run, out, ctx);
    if (compare->parsed()) return cmd_compare(g, lv, fo, run, out, ctx);
    if (scan->parsed()) return cmd_scan(g, lv, go, out, err, ctx);
    if (resonance->parsed()) return cmd_resonance(g, lv, go, out, err, ctx);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidInput& e) {
    err << "invalid input" << (ctx.stage.empty() ? "" : " [" + ctx.stage + "]") << ": " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "numerical failure" << (ctx.stage.empty() ? "" : " [" + ctx.stage + "]") << ": " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace crosc::cli
