#include "crosc/tdse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crosc/error.hpp"

namespace crosc {

namespace {

// Interaction picture with respect to Re(E): c = exp(-i Re(E) t) y, so
// y' = Im(E) y - i f(t) ph (D (ph^* y)) with ph = exp(i Re(E) t).
class Rhs {
 public:
  Rhs(const AtomModel& atom, const LaserField& field, bool ramp, double ramp_start)
      : re_(atom.energies().real()),
        im_(atom.energies().imag()),
        d_(atom.dipole()),
        field_(field),
        ramp_(ramp),
        ramp_start_(ramp_start) {}

  double field(double t) const {
    double f = field_.field_at(t);
    if (ramp_) {
      const double half = 0.5 * field_.period();
      const double s = t - ramp_start_;
      if (s < half) f *= s <= 0.0 ? 0.0 : std::pow(std::sin(std::numbers::pi * s / field_.period()), 2);
    }
    return f;
  }

  Eigen::VectorXcd operator()(double t, const Eigen::VectorXcd& y) const {
    Eigen::VectorXcd out = im_.cast<cd>().cwiseProduct(y);
    const double f = field(t);
    if (f != 0.0) {
      Eigen::VectorXcd ph(re_.size());
      for (Eigen::Index i = 0; i < re_.size(); ++i) ph(i) = std::exp(cd{0.0, re_(i) * t});
      const Eigen::VectorXcd dy = d_ * ph.conjugate().cwiseProduct(y);
      out += cd{0.0, -f} * ph.cwiseProduct(dy);
    }
    return out;
  }

  Eigen::VectorXcd to_schrodinger(double t, const Eigen::VectorXcd& y) const {
    Eigen::VectorXcd c(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) c(i) = std::exp(cd{0.0, -re_(i) * t}) * y(i);
    return c;
  }
  Eigen::VectorXcd to_interaction(double t, const Eigen::VectorXcd& c) const {
    return to_schrodinger(-t, c);
  }

 private:
  Eigen::VectorXd re_;
  Eigen::VectorXd im_;
  Eigen::MatrixXcd d_;
  LaserField field_;
  bool ramp_;
  double ramp_start_;
};

Eigen::VectorXcd rk4_step(const Rhs& f, double t, const Eigen::VectorXcd& y, double h) {
  const Eigen::VectorXcd k1 = f(t, y);
  const Eigen::VectorXcd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Eigen::VectorXcd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Eigen::VectorXcd k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Vertex of the parabola through three equally spaced samples, if y1 is a
// local extremum of the requested kind.
double refine(double y0, double y1, double y2, bool maximum) {
  const double curv = y0 - 2.0 * y1 + y2;
  if (maximum ? !(y1 >= y0 && y1 >= y2 && curv < 0.0) : !(y1 <= y0 && y1 <= y2 && curv > 0.0)) return y1;
  return y1 - (y2 - y0) * (y2 - y0) / (8.0 * curv);
}

}  // namespace

double resolve_dt(const PropagatorConfig& config, const LaserField& field) {
  field.validate();
  if (config.method_order != 4) throw InvalidInput("only the fourth-order propagator is available");
  if (config.steps_per_cycle_min < 1) throw InvalidInput("steps_per_cycle_min must be positive");
  const double limit = field.period() / config.steps_per_cycle_min;
  if (config.dt == 0.0) return limit;
  if (!(config.dt > 0.0) || config.dt > limit * (1.0 + 1e-12)) {
    throw InvalidInput("dt = " + format_number(config.dt) + " exceeds 2 pi / (omega * steps_per_cycle_min) = " +
                       format_number(limit));
  }
  return config.dt;
}

TdseResult propagate(const AtomModel& atom, const LaserField& field, const PropagatorConfig& config,
                     int initial_level, int observed_level) {
  const auto n = static_cast<int>(atom.size());
  if (initial_level < 0 || initial_level >= n) throw InvalidInput("initial level outside the model");
  if (observed_level < 0 || observed_level >= n) throw InvalidInput("observed level outside the model");
  if (!(config.t_max > config.t_start)) throw InvalidInput("t_max must exceed t_start");
  if (config.record_every < 1) throw InvalidInput("record_every must be positive");
  const double dt_max = resolve_dt(config, field);
  const long steps = static_cast<long>(std::ceil((config.t_max - config.t_start) / dt_max - 1e-9));
  const double h = (config.t_max - config.t_start) / steps;

  const Rhs rhs(atom, field, config.sine2_ramp, config.t_start);
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
  y(initial_level) = 1.0;

  TdseResult out;
  out.series.source = "tdse";
  auto record = [&](double t) {
    out.series.times.push_back(t);
    out.series.pop_ground.push_back(std::norm(y(initial_level)));
    out.series.pop_excited.push_back(std::norm(y(observed_level)));
    out.series.norm.push_back(y.squaredNorm());
  };
  record(config.t_start);
  for (long s = 0; s < steps; ++s) {
    const double t = config.t_start + s * h;
    Eigen::VectorXcd next = rk4_step(rhs, t, y, h);
    if (config.monitor_every > 0 && s % config.monitor_every == 0) {
      const Eigen::VectorXcd half = rk4_step(rhs, t + 0.5 * h, rk4_step(rhs, t, y, 0.5 * h), 0.5 * h);
      const double err = (next - half).cwiseAbs().maxCoeff() / 15.0;
      out.max_local_error = std::max(out.max_local_error, err);
      if (err > config.tolerance) {
        throw NumericalError("step rejected at t = " + format_number(t) + ": local error " + format_number(err) +
                             " exceeds " + format_number(config.tolerance) + "; reduce dt");
      }
    }
    if (!next.allFinite()) throw NumericalError("non-finite amplitude at t = " + format_number(t + h));
    y = std::move(next);
    if ((s + 1) % config.record_every == 0 || s + 1 == steps) record(config.t_start + (s + 1) * h);
  }
  out.final_amplitudes = rhs.to_schrodinger(config.t_max, y);
  return out;
}

Eigen::VectorXcd evolve(const AtomModel& atom, const LaserField& field, const Eigen::VectorXcd& c0, double t0,
                        double t1, long steps, bool sine2_ramp, double ramp_start) {
  if (steps < 1) throw InvalidInput("evolve needs at least one step");
  if (c0.size() != static_cast<Eigen::Index>(atom.size())) throw InvalidInput("state size does not match the model");
  const Rhs rhs(atom, field, sine2_ramp, ramp_start);
  const double h = (t1 - t0) / steps;
  Eigen::VectorXcd y = rhs.to_interaction(t0, c0);
  for (long s = 0; s < steps; ++s) y = rk4_step(rhs, t0 + s * h, y, h);
  if (!y.allFinite()) throw NumericalError("non-finite amplitude during evolve");
  return rhs.to_schrodinger(t1, y);
}

std::vector<double> cycle_depths(const PopulationSeries& series, LevelSelector selector, double t0, double t1,
                                 double omega) {
  if (!(omega > 0.0)) throw InvalidInput("omega must be positive");
  const std::vector<double>& p = selector == LevelSelector::kGround ? series.pop_ground : series.pop_excited;
  const std::vector<double>& t = series.times;
  const double period = 2.0 * std::numbers::pi / omega;
  std::vector<double> depths;
  for (int c = 0;; ++c) {
    const double a = t0 + c * period;
    const double b = a + period;
    if (b > t1 + 1e-9 * period) break;
    const auto lo = std::lower_bound(t.begin(), t.end(), a - 1e-9 * period) - t.begin();
    const auto hi = std::upper_bound(t.begin(), t.end(), b + 1e-9 * period) - t.begin();
    if (hi - lo < 3) continue;
    std::size_t imax = lo, imin = lo;
    for (auto i = lo; i < hi; ++i) {
      if (p[i] > p[imax]) imax = i;
      if (p[i] < p[imin]) imin = i;
    }
    auto refined = [&](std::size_t i, bool maximum) {
      if (i == 0 || i + 1 >= p.size()) return p[i];
      return refine(p[i - 1], p[i], p[i + 1], maximum);
    };
    depths.push_back(refined(imax, true) - refined(imin, false));
  }
  return depths;
}

double modulation_depth(const PopulationSeries& series, LevelSelector selector, double t0, double t1,
                        double omega) {
  if (series.size() == 0) throw InvalidInput("modulation depth of an empty series");
  const std::vector<double> d = cycle_depths(series, selector, t0, t1, omega);
  if (d.size() < 2) throw InvalidInput("modulation depth window must hold at least two optical cycles");
  return *std::max_element(d.begin(), d.end());
}

}  // namespace crosc
