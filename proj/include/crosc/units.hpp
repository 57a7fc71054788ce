#pragma once

// Unit conventions shared by every module. Atomic units throughout unless a
// name says otherwise.

namespace crosc::units {

inline constexpr double kHartreeEv = 27.211386245988;
/// Intensity corresponding to a unit field amplitude, W/cm^2.
inline constexpr double kIntensityAu = 3.50944758e16;
/// One atomic unit of time in attoseconds.
inline constexpr double kTimeAuAs = 24.18884;
inline constexpr double kTimeAuFs = kTimeAuAs * 1e-3;

double intensity_to_field(double intensity_wcm2);
double field_to_intensity(double e0_au);

inline constexpr double ev_to_au(double ev) { return ev / kHartreeEv; }
inline constexpr double au_to_ev(double au) { return au * kHartreeEv; }
inline constexpr double fs_to_au(double fs) { return fs / kTimeAuFs; }
inline constexpr double au_to_fs(double t) { return t * kTimeAuFs; }

}  // namespace crosc::units
