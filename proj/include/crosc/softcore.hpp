#pragma once

#include "crosc/atom_model.hpp"

namespace crosc {

/// Uniform box grid for the one-dimensional soft-core atom
/// H = p^2/2 - 1/sqrt(x^2 + a^2) - i W(x) on (-extent, extent).
struct GridSpec {
  double extent = 100.0;       // box half-width
  int points = 1000;           // interior grid points
  double softening = 0.484;    // a^2
  double cap_start = 70.0;     // absorber onset |x|
  double cap_strength = 1.0;   // W(extent)

  void validate() const;
  double spacing() const { return 2.0 * extent / (points + 1); }
};

/// How the absorber enters the kept states.
enum class AbsorberTreatment {
  /// Widths from <n|W|n> of the field-free bound/box states; real dipoles.
  kFirstOrder,
  /// Complex-symmetric diagonalization of diag(eps) - i W within the kept
  /// states, c-product normalized eigenvectors and complex-symmetric dipoles.
  kExact,
};

/// Absorbing ramp W(x) = strength ((|x| - start)/(extent - start))^2 beyond start.
double absorber(const GridSpec& grid, double x);

/// Builds the model atom from the n_keep lowest states. Level labels are
/// "e<n>" / "o<n>" by spatial parity; symmetry tag is the parity (0 even, 1 odd).
AtomModel build_softcore_model(const GridSpec& grid, int n_keep,
                               AbsorberTreatment treatment = AbsorberTreatment::kFirstOrder);

/// Soft-core SAE stand-in for helium (a^2 = 0.484, He ionization potential),
/// 100 states; the three lowest carry helium-like labels 1s2, 1s2p, 1s3d.
AtomModel helium_like_model();

}  // namespace crosc
