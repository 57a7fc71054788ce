#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "crosc/floquet.hpp"
#include "crosc/linalg.hpp"

namespace crosc {

/// P-space = {|a,0>, |b,-m>}; Q-space = every other basis state in flat order.
struct Partition {
  FloquetIndex ground;
  FloquetIndex excited;
  std::array<Eigen::Index, 2> p_flat{};
  std::vector<Eigen::Index> q_flat;
  std::array<std::string, 2> labels;  // optional level labels for dumps
  int n_levels = 0;
  PhotonWindow window;

  /// Photon order m of the transition (excited.photons = -m).
  int order() const { return ground.photons - excited.photons; }
  /// Position of a basis state inside q_flat, or -1 for P-space / outside.
  Eigen::Index q_position(Eigen::Index flat) const;
  /// Flat index of a basis state, or -1 outside the window.
  Eigen::Index flat(const FloquetIndex& idx) const;
};

Partition make_partition(const FloquetMatrix& matrix, const FloquetIndex& ground, const FloquetIndex& excited);

struct EffectiveHamiltonian {
  Eigen::Matrix2cd matrix = Eigen::Matrix2cd::Zero();
  int order = 0;
  cd e_ref = 0.0;
  Partition partition;
};

struct CorrectionC {
  Eigen::Matrix2cd matrix = Eigen::Matrix2cd::Zero();
};

/// chi = (E0 - QHQ)^{-1} QVP, rows follow partition.q_flat, columns (a, b).
struct ReducedWaveOp {
  Eigen::MatrixXcd matrix;
  Partition partition;

  /// <q|chi|column>, zero if q is a P-space state; throws outside the basis.
  cd element(Eigen::Index q_flat_index, int column) const;
};

/// Arithmetic mean of the two unperturbed essential diagonal entries.
cd default_e_ref(const FloquetMatrix& matrix, const Partition& partition);

/// Default threshold on the distance |E - nearest Q eigenvalue| below which a
/// resolvent evaluation is treated as sitting on a pole.
inline constexpr double kPoleTolerance = 1e-9;

/// One factorization of (E - QHQ) with the P/Q blocks it needs. Throws
/// PoleError when E sits on (or within pole_tolerance of) a Q-space eigenvalue.
class QResolvent {
 public:
  QResolvent(const FloquetMatrix& matrix, const Partition& partition, cd energy,
             double pole_tolerance = kPoleTolerance);

  cd energy() const { return energy_; }
  const Eigen::Matrix2cd& php() const { return php_; }
  const Eigen::MatrixXcd& pvq() const { return pvq_; }
  const Eigen::MatrixXcd& qvp() const { return qvp_; }
  /// (E - QHQ)^{-1} QVP
  const Eigen::MatrixXcd& chi() const { return chi_; }
  /// (E - QHQ)^{-2} QVP
  Eigen::MatrixXcd chi2() const { return lu_.solve(chi_); }
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const { return lu_.solve(rhs); }
  bool banded() const { return lu_.banded(); }
  double pivot_ratio() const { return lu_.pivot_ratio(); }
  /// Inverse-iteration estimate of the Q-space eigenvalue closest to E.
  cd nearest_pole() const { return nearest_pole_; }

 private:
  cd energy_;
  Eigen::Matrix2cd php_;
  Eigen::MatrixXcd pvq_;
  Eigen::MatrixXcd qvp_;
  linalg::LuSolver lu_;
  Eigen::MatrixXcd chi_;
  cd nearest_pole_;
};

/// PHP + PVQ (E - QHQ)^{-1} QVP
Eigen::Matrix2cd heff_energy_dependent(const FloquetMatrix& matrix, const Partition& partition, cd energy);

EffectiveHamiltonian heff0(const FloquetMatrix& matrix, const Partition& partition, cd e_ref);
CorrectionC correction_C(const FloquetMatrix& matrix, const Partition& partition, cd e_ref);
EffectiveHamiltonian heff1(const FloquetMatrix& matrix, const Partition& partition, cd e_ref);
/// (P+C)^{1/2} H1 (P+C)^{-1/2}
Eigen::Matrix2cd heff1_complex_symmetric(const EffectiveHamiltonian& heff1, const CorrectionC& c);
ReducedWaveOp reduced_wave_operator(const FloquetMatrix& matrix, const Partition& partition, cd e_ref);

/// Everything at one reference energy from a single factorization.
struct EffhamBundle {
  EffectiveHamiltonian h0;
  EffectiveHamiltonian h1;
  CorrectionC c;
  ReducedWaveOp chi;
  std::optional<Eigen::Matrix2cd> h1_cs;  // empty when (P+C) has no principal root
  double pivot_ratio = 1.0;
  double p_plus_c_det = 1.0;  // |det(P + C)|
  cd nearest_pole;
};

EffhamBundle effham_bundle(const FloquetMatrix& matrix, const Partition& partition, cd e_ref,
                           double pole_tolerance = kPoleTolerance);
/// Same with e_ref = default_e_ref.
EffhamBundle effham_bundle(const FloquetMatrix& matrix, const Partition& partition);

/// The two full eigenvectors with the largest summed squared overlap with the
/// essential states, ordered to pair with `reference` eigenvalues.
std::array<Eigen::Index, 2> match_p_dominant(const FloquetEigensystem& es, const Partition& partition,
                                             const Eigen::Vector2cd& reference);

nlohmann::json heff_to_json(const EffectiveHamiltonian& h);
EffectiveHamiltonian heff_from_json(const nlohmann::json& doc);

}  // namespace crosc
