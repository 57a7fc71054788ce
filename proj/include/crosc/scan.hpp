#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crosc/dynamics.hpp"
#include "crosc/effham.hpp"
#include "crosc/interp.hpp"

namespace crosc {

/// Regular (omega, intensity) grid; omegas in hartree, intensities in W/cm^2.
struct ParamGrid {
  std::vector<double> omegas;
  std::vector<double> intensities;

  /// Sorted, finite, positive omegas and non-negative intensities; with
  /// `cubic`, at least 4 nodes on every axis that has more than one node.
  void validate(bool cubic = false) const;
  std::size_t size() const { return omegas.size() * intensities.size(); }
};

/// Evenly spaced nodes from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

/// Which essential states to keep and how to build the Floquet problem.
struct PartitionPolicy {
  int ground_level = 0;
  int excited_level = 1;
  int order = 2;                          // photons absorbed: excited state is |b,-order>
  std::optional<PhotonWindow> window;     // default_window(order) when empty
  std::optional<cd> e_ref_offset;         // added to the default e_ref

  PhotonWindow resolved_window() const { return window.value_or(default_window(order)); }
};

/// Thresholds behind the validity mask of a node.
struct ValidityThresholds {
  double max_correction = 0.5;     // max |C_ij|
  double min_pole_distance = 1e-6; // |e_ref - nearest Q eigenvalue|
};

struct HeffNode {
  bool valid = false;
  EffectiveHamiltonian h1;
  CRAmplitudes cr;
  double chi_ground_norm = 0.0;  // |chi |a,0>|, small when the compact form applies
  double correction_norm = 0.0;
  double pole_distance = 0.0;
  std::string error;             // empty unless the node failed or was masked
};

/// One H_eff^(1) per node, omega-major: node(i, j) is (omegas[i], intensities[j]).
struct HeffGrid {
  ParamGrid grid;
  PartitionPolicy policy;
  std::vector<HeffNode> nodes;

  const HeffNode& node(std::size_t i_omega, std::size_t i_intensity) const {
    return nodes.at(i_omega * grid.intensities.size() + i_intensity);
  }
  std::size_t failures() const;
};

/// H_eff bundle at a single (omega, intensity) point.
EffhamBundle effham_at(const AtomModel& atom, const PartitionPolicy& policy, double omega, double intensity,
                       Partition* partition_out = nullptr);

/// Nodes are independent tasks run by `workers` threads; each result lands in
/// its own slot, so output does not depend on the worker count.
HeffGrid scan_heff(const AtomModel& atom, const ParamGrid& grid, const PartitionPolicy& policy, int workers = 1,
                   const ValidityThresholds& thresholds = {});

/// Entry-wise cubic interpolation of H_eff^(1) and the CR amplitudes.
class HeffInterpolator {
 public:
  explicit HeffInterpolator(const HeffGrid& hgrid);

  EffectiveHamiltonian heff(double omega, double intensity) const;
  CRAmplitudes cr(double omega, double intensity) const;
  const ParamGrid& grid() const { return grid_; }
  int order() const { return order_; }

 private:
  ParamGrid grid_;
  Partition partition_;
  int order_;
  GridInterpolator interp_;
};

EffectiveHamiltonian interpolate_heff(const HeffGrid& hgrid, double omega, double intensity);

/// Frequency that balances Re(H11) = Re(H22) of H_eff^(1) at fixed intensity,
/// by fixed-point iteration starting from `omega_guess`.
double find_balanced_omega(const AtomModel& atom, const PartitionPolicy& policy, double intensity,
                           double omega_guess, double tolerance = 1e-12, int max_iterations = 60);

struct Resonance {
  double intensity = 0.0;
  double omega_max = 0.0;
  double max_pop = 0.0;
  double width = 0.0;       // FWHM in omega of max_t |b|^2; NaN if not bracketed inside the grid
};

/// max_t |b(t)|^2 for the interpolated H_eff at (omega, intensity).
double peak_excited_population(const HeffInterpolator& interp, double omega, double intensity);

/// Centred finite-difference step used by the resonance refinement.
inline constexpr double kResonanceFdStep = 1e-7;

/// omega maximizing max_t |b(t)|^2 at fixed intensity. Throws NumericalError
/// when the maximum sits on the omega boundary of the grid.
Resonance dressed_resonance(const HeffInterpolator& interp, double intensity);
Resonance dressed_resonance(const HeffGrid& hgrid, double intensity);

struct RegimeCell {
  double omega = 0.0;
  double intensity = 0.0;
  double zeta = 0.0;
  double max_pop = 0.0;
  double m_max = 0.0;
  bool valid = false;
};

/// Per-node damping ratio, peak excited population and M_max. zeta is
/// evaluated off resonance too (no resonance check); invalid nodes carry NaN.
std::vector<RegimeCell> regime_map(const HeffGrid& hgrid);

/// |b(t)|^2 along the resonance ridge (omega_max(I), I) on a common time grid.
struct RidgeMap {
  std::vector<Resonance> ridge;
  std::vector<double> times;
  std::vector<std::vector<double>> pop_excited;  // [intensity][time]
};
RidgeMap ridge_map(const HeffGrid& hgrid, const std::vector<double>& intensities, double t_max, int samples);

/// Grid dump: axes, policy and per-node H_eff^(1), CR amplitudes and validity.
nlohmann::json heff_grid_to_json(const HeffGrid& hgrid);
HeffGrid heff_grid_from_json(const nlohmann::json& doc);

void write_regime_csv(std::ostream& out, const std::vector<RegimeCell>& cells);
void write_resonance_csv(std::ostream& out, const std::vector<Resonance>& rows);
void write_ridge_csv(std::ostream& out, const RidgeMap& map);

std::vector<RegimeCell> read_regime_csv(std::istream& in);
std::vector<Resonance> read_resonance_csv(std::istream& in);

}  // namespace crosc
