#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace crosc {

using cd = std::complex<double>;

/// A field-free level. Im(energy) = -Gamma/2 carries the decay width.
struct Level {
  std::string label;
  cd energy;
  int symmetry = 0;  // parity / angular channel; parity = symmetry % 2

  double width() const { return -2.0 * energy.imag(); }
};

/// Field-free levels plus the complex-symmetric dipole matrix (c-product
/// convention, no conjugation). Immutable once constructed; the constructor
/// enforces every invariant.
class AtomModel {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;
  static constexpr double kWidthSignTolerance = 1e-10;

  AtomModel(std::vector<Level> levels, Eigen::MatrixXcd dipole,
            std::map<std::string, std::string> metadata = {});

  std::size_t size() const { return levels_.size(); }
  const std::vector<Level>& levels() const { return levels_; }
  const Level& level(std::size_t i) const { return levels_.at(i); }
  const Eigen::MatrixXcd& dipole() const { return dipole_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  Eigen::VectorXcd energies() const;
  /// Throws InvalidInput if the label is unknown.
  std::size_t index_of(const std::string& label) const;

  /// Same model with every energy moved by a real constant.
  AtomModel shifted(double offset) const;
  /// Same model with the dipole matrix multiplied by exp(i*phase).
  AtomModel with_dipole_phase(double phase) const;

 private:
  std::vector<Level> levels_;
  Eigen::MatrixXcd dipole_;
  std::map<std::string, std::string> metadata_;
};

/// Dipole elements between levels of equal parity whose magnitude exceeds tol.
struct SelectionRuleViolation {
  std::size_t i;
  std::size_t j;
  double magnitude;
};
std::vector<SelectionRuleViolation> selection_rule_violations(const AtomModel& atom,
                                                              double tol = 1e-10);

AtomModel parse_atom_model(const nlohmann::json& doc);
AtomModel load_atom_model(const std::string& path);
nlohmann::json atom_model_to_json(const AtomModel& atom);
void save_atom_model(const AtomModel& atom, const std::string& path);

enum class EnvelopeKind { kRectangular, kGaussian };

/// Linearly polarized field E(t) = E0 env(t) cos(omega t + phase).
/// The Gaussian envelope follows I(t) = I0 exp(-ln2 (2t/fwhm)^2), centred at t = 0.
struct LaserField {
  double omega = 0.0;  // photon energy
  double e0 = 0.0;     // peak amplitude
  EnvelopeKind envelope = EnvelopeKind::kRectangular;
  double fwhm = 0.0;   // intensity FWHM, atomic time units (Gaussian only)
  double phase = 0.0;

  void validate() const;
  double intensity_envelope(double t) const;
  double field_envelope(double t) const;
  double field_at(double t) const;
  double period() const;
};

LaserField monochromatic(double omega, double e0, double phase = 0.0);

/// Parses the field/pulse JSON ({"omega_ev"|"omega_au", "intensity_wcm2"|"e0_au",
/// "envelope", "phase"}).
LaserField parse_laser_field(const nlohmann::json& doc);
LaserField load_laser_field(const std::string& path);

/// Named fixtures shipped with the library.
AtomModel two_level_model(double e1 = 0.0, double e2 = 0.5, double d12 = 1.0);
/// Five-level ladder: weakly coupled ground state, strongly coupled excited
/// state with two nearby Rydberg-like neighbours carrying phenomenological widths.
AtomModel ladder5_model();

}  // namespace crosc
