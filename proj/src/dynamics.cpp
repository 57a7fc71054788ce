#include "crosc/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "crosc/error.hpp"

namespace crosc {

namespace {

constexpr double kGapFloor = 1e-14;
constexpr double kCouplingFloor = 1e-16;
constexpr int kSamplesPerPeriod = 400;
constexpr long kMaxSamples = 4'000'000;

// Eigenvector of [[p, q], [r, s]] for eigenvalue mu, unit norm, largest
// component real and positive.
Eigen::Vector2cd eigenvector(const Eigen::Matrix2cd& h, cd mu) {
  const Eigen::Vector2cd c1(h(0, 1), mu - h(0, 0));
  const Eigen::Vector2cd c2(mu - h(1, 1), h(1, 0));
  Eigen::Vector2cd v = c1.norm() >= c2.norm() ? c1 : c2;
  v /= v.norm();
  const int big = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  v *= std::conj(v(big)) / std::abs(v(big));
  return v;
}

double excited_population(const DressedStates& d, double t) { return std::norm(cycle_averaged_amplitudes(d, t).second); }

std::array<int, 3> cr_photons(const Partition& p) {
  const int k = p.excited.photons;
  return {k + 2, k, k - 2};
}

Eigen::Vector2cd chi_row(const ReducedWaveOp& chi, const Partition& partition, int photons) {
  const Eigen::Index flat = partition.flat({partition.excited.level, photons});
  if (flat < 0) {
    throw InvalidInput("CR state (level " + std::to_string(partition.excited.level) + ", k = " +
                       std::to_string(photons) + ") lies outside the Floquet window; enlarge [k_min, k_max]");
  }
  return {chi.element(flat, 0), chi.element(flat, 1)};
}

}  // namespace

double DressedStates::closure_defect() const {
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (int j = 0; j < 2; ++j) sum += right.col(j) * left.row(j);
  return (sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
}

DressedStates dressed_diagonalize(const Eigen::Matrix2cd& h) {
  if (!h.allFinite()) throw NumericalError("effective Hamiltonian has non-finite entries");
  const cd half_trace = 0.5 * h.trace();
  const cd half_split = 0.5 * (h(0, 0) - h(1, 1));
  cd disc = std::sqrt(half_split * half_split + h(0, 1) * h(1, 0));
  if (disc.real() < 0.0 || (disc.real() == 0.0 && disc.imag() < 0.0)) disc = -disc;
  DressedStates d;
  if (2.0 * std::abs(disc) < kGapFloor) {
    // A degenerate but uncoupled (diagonal) matrix is not an exceptional point.
    if (h(0, 1) == cd{0.0} && h(1, 0) == cd{0.0}) {
      d.lambda_plus = h(0, 0);
      d.lambda_minus = h(1, 1);
      d.right.setIdentity();
      d.left.setIdentity();
      return d;
    }
    throw NumericalError("exceptional point: dressed eigenvalues coincide (gap below 1e-14)");
  }
  d.lambda_plus = half_trace + disc;
  d.lambda_minus = half_trace - disc;
  d.right.col(0) = eigenvector(h, d.lambda_plus);
  d.right.col(1) = eigenvector(h, d.lambda_minus);
  d.left = d.right.inverse();
  return d;
}

DressedStates dressed_diagonalize(const EffectiveHamiltonian& heff) { return dressed_diagonalize(heff.matrix); }

std::pair<cd, cd> cycle_averaged_amplitudes(const DressedStates& d, double t) {
  if (t < 0.0) throw InvalidInput("cycle-averaged amplitudes need t >= 0");
  cd a = 0.0, b = 0.0;
  for (int j = 0; j < 2; ++j) {
    const cd w = std::exp(cd{0.0, -1.0} * d.lambda(j) * t) * d.left(j, 0);
    a += d.right(0, j) * w;
    b += d.right(1, j) * w;
  }
  return {a, b};
}

CRAmplitudes cr_amplitudes(const ReducedWaveOp& chi, const Partition& partition) {
  const auto k = cr_photons(partition);
  CRAmplitudes cr;
  cr.lambda_0 = sideband_amplitude(chi, partition, k[0]);
  cr.lambda_m4 = sideband_amplitude(chi, partition, k[2]);
  cr.lambda_sum = cr.lambda_0 + cr.lambda_m4;
  return cr;
}

cd sideband_amplitude(const ReducedWaveOp& chi, const Partition& partition, int photons) {
  return chi_row(chi, partition, photons)(1);
}

cd cr_transition_amplitude(const DressedStates& d, const ReducedWaveOp& chi, const Partition& partition,
                           double omega, double t) {
  if (t < 0.0) throw InvalidInput("CR transition amplitude needs t >= 0");
  cd sum = 0.0;
  for (int k : cr_photons(partition)) {
    const bool essential = k == partition.excited.photons;
    const Eigen::Vector2cd row = essential ? Eigen::Vector2cd(0.0, 1.0) : chi_row(chi, partition, k);
    cd per_k = 0.0;
    for (int j = 0; j < 2; ++j) {
      per_k += row.cwiseProduct(d.right.col(j)).sum() * std::exp(cd{0.0, -1.0} * d.lambda(j) * t) * d.left(j, 0);
    }
    sum += per_k * std::exp(cd{0.0, k * omega * t});
  }
  return sum;
}

CompactPopulation cr_population_compact(const DressedStates& d, const CRAmplitudes& cr, double omega, double t) {
  const double b2 = excited_population(d, t);
  const double base = 1.0 + std::norm(cr.lambda_0) + std::norm(cr.lambda_m4);
  const double swing = 2.0 * cr.lambda_sum.real();
  return {b2 * (base + swing * std::cos(2.0 * omega * t)), b2 * (base - std::abs(swing)),
          b2 * (base + std::abs(swing))};
}

double interference_bound(const CRAmplitudes& cr, double max_pop) {
  return 4.0 * std::abs(cr.lambda_0) * std::abs(cr.lambda_m4) * max_pop;
}

double rabi_period(const DressedStates& d) {
  const double gap = std::abs((d.lambda_plus - d.lambda_minus).real());
  return gap > 0.0 ? 2.0 * std::numbers::pi / gap : std::numeric_limits<double>::infinity();
}

double default_t_max(const DressedStates& d) {
  const double tr = rabi_period(d);
  if (std::isfinite(tr) && std::abs((d.lambda_plus - d.lambda_minus).imag()) <
                               std::abs((d.lambda_plus - d.lambda_minus).real())) {
    return tr;
  }
  return 2.0 * std::numbers::pi / std::abs(d.lambda_plus - d.lambda_minus);
}

PeakPopulation max_excited_population(const DressedStates& d, double t_max) {
  if (!(t_max > 0.0)) throw InvalidInput("t_max must be positive");
  double period = rabi_period(d);
  if (!std::isfinite(period)) period = 2.0 * std::numbers::pi / std::abs(d.lambda_plus - d.lambda_minus);
  const double want = std::ceil(kSamplesPerPeriod * t_max / period);
  const long n = static_cast<long>(std::clamp(want, static_cast<double>(kSamplesPerPeriod),
                                              static_cast<double>(kMaxSamples)));
  const double h = t_max / n;
  long best = 0;
  double best_value = -1.0;
  for (long i = 0; i <= n; ++i) {
    const double v = excited_population(d, i * h);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  // Golden-section refinement on the bracketing sample interval.
  double lo = std::max(0.0, (best - 1) * h);
  double hi = std::min(t_max, (best + 1) * h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = excited_population(d, x1), f2 = excited_population(d, x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = excited_population(d, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = excited_population(d, x2);
    }
  }
  PeakPopulation peak{best_value, best * h};
  const double tm = 0.5 * (lo + hi);
  const double fm = excited_population(d, tm);
  if (fm > peak.value) peak = {fm, tm};
  return peak;
}

double m_max(const CRAmplitudes& cr, const DressedStates& d, double t_max) {
  return 4.0 * std::abs(cr.lambda_sum.real()) * max_excited_population(d, t_max).value;
}

double damping_ratio(const Eigen::Matrix2cd& h, double resonance_tolerance) {
  const double omega_eff = 2.0 * std::sqrt(std::abs(h(0, 1) * h(1, 0)));
  if (omega_eff < kCouplingFloor) throw NumericalError("damping ratio undefined: effective coupling below 1e-16");
  const double detuning = std::abs((h(0, 0) - h(1, 1)).real());
  if (resonance_tolerance >= 0.0 && detuning > resonance_tolerance * omega_eff) {
    throw InvalidInput("damping ratio needs a resonant H_eff: |Re(H11 - H22)| = " + format_number(detuning) +
                       " exceeds " + format_number(resonance_tolerance) + " * Omega_eff");
  }
  const double gamma_a = -2.0 * h(0, 0).imag();
  const double gamma_b = -2.0 * h(1, 1).imag();
  return std::abs(gamma_b - gamma_a) / (2.0 * omega_eff);
}

double damping_ratio(const EffectiveHamiltonian& heff, double resonance_tolerance) {
  return damping_ratio(heff.matrix, resonance_tolerance);
}

EffectiveSeries effective_series(const DressedStates& d, const ReducedWaveOp& chi, const Partition& partition,
                                 double omega, const std::vector<double>& times) {
  const CRAmplitudes cr = cr_amplitudes(chi, partition);
  EffectiveSeries out;
  out.compact.source = "effham";
  out.full.source = "effham_eq4";
  for (double t : times) {
    const auto [a, b] = cycle_averaged_amplitudes(d, t);
    const double norm = std::norm(a) + std::norm(b);
    const CompactPopulation c = cr_population_compact(d, cr, omega, t);
    for (PopulationSeries* s : {&out.compact, &out.full}) {
      s->times.push_back(t);
      s->pop_ground.push_back(std::norm(a));
      s->norm.push_back(norm);
    }
    out.compact.pop_excited.push_back(c.population);
    out.compact.envelope_lo.push_back(c.envelope_lo);
    out.compact.envelope_hi.push_back(c.envelope_hi);
    out.full.pop_excited.push_back(std::norm(cr_transition_amplitude(d, chi, partition, omega, t)));
  }
  return out;
}

}  // namespace crosc
