#pragma once

#include <utility>
#include <vector>

#include "crosc/effham.hpp"
#include "crosc/series.hpp"

namespace crosc {

/// Bi-orthonormal eigenpairs of a 2x2 effective Hamiltonian. Columns of
/// `right` are |+>, |->; rows of `left` are <~+|, <~-|. Re(lambda_plus) >= Re(lambda_minus).
struct DressedStates {
  cd lambda_plus;
  cd lambda_minus;
  Eigen::Matrix2cd right;
  Eigen::Matrix2cd left;

  cd lambda(int j) const { return j == 0 ? lambda_plus : lambda_minus; }
  /// max |sum_j |j><~j| - 1|
  double closure_defect() const;
};

DressedStates dressed_diagonalize(const Eigen::Matrix2cd& h);
DressedStates dressed_diagonalize(const EffectiveHamiltonian& heff);

/// Cycle-averaged (a(t), b(t)) for the system starting in |a,0>.
std::pair<cd, cd> cycle_averaged_amplitudes(const DressedStates& dressed, double t);

/// Lambda^(0) and Lambda^(-4): for an order-m partition, the excited-column
/// entries of chi at the CR states |b,-m+2> and |b,-m-2>.
struct CRAmplitudes {
  cd lambda_0;
  cd lambda_m4;
  cd lambda_sum;
};

CRAmplitudes cr_amplitudes(const ReducedWaveOp& chi, const Partition& partition);
/// <b,k|chi|b,-m>, the excited column at photon index k.
cd sideband_amplitude(const ReducedWaveOp& chi, const Partition& partition, int photons);

/// Full sideband sum over k in {-m+2, -m, -m-2} of <b,k|P+chi|j> e^{-i lambda_j t} <~j|a,0> e^{i k omega t}.
cd cr_transition_amplitude(const DressedStates& dressed, const ReducedWaveOp& chi, const Partition& partition,
                           double omega, double t);

struct CompactPopulation {
  double population;
  double envelope_lo;
  double envelope_hi;
};

/// Compact form: |b|^2 [1 + |L0|^2 + |L4|^2 + 2 Re(L) cos(2 omega t)], envelopes with cos -> -1, +1.
CompactPopulation cr_population_compact(const DressedStates& dressed, const CRAmplitudes& cr, double omega,
                                        double t);

/// Upper bound 4 |L0| |L4| max|b|^2 on the interference terms the compact form drops.
double interference_bound(const CRAmplitudes& cr, double max_pop);

struct PeakPopulation {
  double value = 0.0;
  double time = 0.0;
};

/// 2 pi / |Re(lambda_+ - lambda_-)|, infinite for a purely imaginary gap.
double rabi_period(const DressedStates& dressed);
/// One Rabi period, or 2 pi / |lambda_+ - lambda_-| when the gap is not oscillatory.
double default_t_max(const DressedStates& dressed);

/// max_{0<=t<=t_max} |b(t)|^2 by dense sampling (>= 400 samples per Rabi
/// period) followed by golden-section refinement.
PeakPopulation max_excited_population(const DressedStates& dressed, double t_max);

/// 4 |Re(Lambda)| max_t |b(t)|^2.
double m_max(const CRAmplitudes& cr, const DressedStates& dressed, double t_max);

/// Fraction of Omega_eff the real diagonal detuning may reach before
/// damping_ratio refuses to call the Hamiltonian resonant.
inline constexpr double kResonanceTolerance = 0.05;

/// zeta = |Gamma_b - Gamma_a| / (2 Omega_eff), Gamma_i = -2 Im H_ii,
/// Omega_eff = 2 |H12 H21|^{1/2}. A negative tolerance skips the resonance check.
double damping_ratio(const Eigen::Matrix2cd& h, double resonance_tolerance = kResonanceTolerance);
double damping_ratio(const EffectiveHamiltonian& heff, double resonance_tolerance = kResonanceTolerance);

/// Effective-side series on the given times: compact rows with envelopes
/// (source "effham") and full sideband-sum rows (source "effham_eq4").
struct EffectiveSeries {
  PopulationSeries compact;
  PopulationSeries full;
};
EffectiveSeries effective_series(const DressedStates& dressed, const ReducedWaveOp& chi,
                                 const Partition& partition, double omega,
                                 const std::vector<double>& times);

}  // namespace crosc
