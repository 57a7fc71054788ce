#pragma once

#include <functional>

#include "crosc/atom_model.hpp"
#include "crosc/series.hpp"

namespace crosc {

/// Fixed-step RK4 settings for the model-atom TDSE i c' = (H0 + E(t) D) c.
struct PropagatorConfig {
  double dt = 0.0;                 // 0 picks 2 pi / (omega * steps_per_cycle_min)
  int steps_per_cycle_min = 400;
  int method_order = 4;            // only 4 is supported
  double t_max = 0.0;
  double t_start = 0.0;            // negative for pulses centred at t = 0
  bool sine2_ramp = false;         // half-cycle sin^2 switch-on after t_start
  int record_every = 1;
  double tolerance = 1e-8;         // step-doubling local error limit
  int monitor_every = 50;          // steps between step-doubling checks (0 disables)
};

/// Resolved step size; throws InvalidInput when dt violates the
/// steps-per-cycle bound.
double resolve_dt(const PropagatorConfig& config, const LaserField& field);

struct TdseResult {
  PopulationSeries series;           // pop_ground = initial level, pop_excited = observed level
  Eigen::VectorXcd final_amplitudes;
  double max_local_error = 0.0;      // largest step-doubling estimate seen
};

/// Propagates from |initial_level> and records |c_initial|^2, |c_observed|^2
/// and sum |c_n|^2 every `record_every` steps (source "tdse").
TdseResult propagate(const AtomModel& atom, const LaserField& field, const PropagatorConfig& config,
                     int initial_level, int observed_level);

/// Amplitudes after evolving c0 from t0 to t1 in `steps` equal RK4 steps
/// (t1 < t0 integrates backwards).
Eigen::VectorXcd evolve(const AtomModel& atom, const LaserField& field, const Eigen::VectorXcd& c0, double t0,
                        double t1, long steps, bool sine2_ramp = false, double ramp_start = 0.0);

enum class LevelSelector { kGround, kExcited };

/// Per-cycle (max - min) of the selected population for each complete optical
/// cycle inside [t0, t1]; extrema are refined by three-point parabolas.
std::vector<double> cycle_depths(const PopulationSeries& series, LevelSelector selector, double t0, double t1,
                                 double omega);
/// Maximum of cycle_depths. Needs at least two complete cycles in the window.
double modulation_depth(const PopulationSeries& series, LevelSelector selector, double t0, double t1,
                        double omega);

}  // namespace crosc
