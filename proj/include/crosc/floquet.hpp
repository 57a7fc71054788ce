#pragma once

#include <iosfwd>
#include <vector>

#include "crosc/atom_model.hpp"

namespace crosc {

/// Atom-photon state |level, k>. Negative k counts absorbed photons.
struct FloquetIndex {
  int level = 0;
  int photons = 0;

  bool operator==(const FloquetIndex&) const = default;
};

/// Photon-block window [k_min, k_max].
struct PhotonWindow {
  int k_min = 0;
  int k_max = 0;

  int blocks() const { return k_max - k_min + 1; }
};

/// k_min = -order - guard, k_max = guard: the CR states of an order-m
/// transition (|b,0>, |b,-2m>) plus `guard` blocks beyond the essential ones.
PhotonWindow default_window(int order = 2, int guard = 4);

inline constexpr Eigen::Index kDefaultDimensionCap = 20000;

/// H_F in the (level, photon) product basis. Block k on the diagonal is
/// diag(E_n) + k*omega; neighbouring blocks couple through (E0/2) d.
class FloquetMatrix {
 public:
  FloquetMatrix(const AtomModel& atom, const LaserField& field, PhotonWindow window,
                Eigen::Index dimension_cap = kDefaultDimensionCap);

  Eigen::Index dimension() const { return matrix_.rows(); }
  int n_levels() const { return n_levels_; }
  const PhotonWindow& window() const { return window_; }
  double omega() const { return omega_; }
  double e0() const { return e0_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  bool contains(const FloquetIndex& idx) const;
  /// (photons - k_min) * n_levels + level; throws InvalidInput outside the basis.
  Eigen::Index flat(const FloquetIndex& idx) const;
  FloquetIndex index_at(Eigen::Index flat) const;

  /// Coupling part V (off-diagonal blocks only).
  Eigen::MatrixXcd coupling() const;

 private:
  int n_levels_;
  PhotonWindow window_;
  double omega_;
  double e0_;
  Eigen::MatrixXcd matrix_;
};

FloquetMatrix assemble_floquet(const AtomModel& atom, const LaserField& field, int k_min, int k_max,
                               Eigen::Index dimension_cap = kDefaultDimensionCap);

/// Right eigenvectors as columns, left eigenvectors as rows, left * right = 1.
struct FloquetEigensystem {
  Eigen::VectorXcd quasienergies;
  Eigen::MatrixXcd right;
  Eigen::MatrixXcd left;
  int n_levels = 0;
  PhotonWindow window;
  double omega = 0.0;

  Eigen::Index flat(const FloquetIndex& idx) const;
  bool contains(const FloquetIndex& idx) const;
};

FloquetEigensystem diagonalize_floquet(const FloquetMatrix& matrix);

/// max |left * right - 1|
double biorthonormality_defect(const FloquetEigensystem& es);
/// max_j |H r_j - lambda_j r_j| / (|H| |r_j|)
double relative_residual(const FloquetMatrix& matrix, const FloquetEigensystem& es);

/// <b,k| exp(-i H_F t) |from> exp(i k omega t) for a single photon index k.
cd floquet_component(const FloquetEigensystem& es, const FloquetIndex& from, const FloquetIndex& to,
                     double t);

/// U_ba(t) = sum_k <b,k| exp(-i H_F t) |a,0> exp(i k omega t).
cd floquet_transition_amplitude(const FloquetEigensystem& es, const FloquetIndex& from, int to_level,
                                double t);

/// Same amplitude on many times, sharing the spectral weights.
std::vector<cd> floquet_transition_series(const FloquetEigensystem& es, const FloquetIndex& from,
                                          int to_level, const std::vector<double>& times);

/// Nonzero entries as "row col re im" lines, zero-based.
void write_triplets(const FloquetMatrix& matrix, std::ostream& out);

}  // namespace crosc
