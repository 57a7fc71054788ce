#include "crosc/units.hpp"

#include <cmath>
#include <string>

#include "crosc/error.hpp"

namespace crosc::units {

double intensity_to_field(double intensity_wcm2) {
  if (!(intensity_wcm2 >= 0.0) || !std::isfinite(intensity_wcm2)) {
    throw InvalidInput("intensity must be finite and non-negative, got " +
                       std::to_string(intensity_wcm2));
  }
  return std::sqrt(intensity_wcm2 / kIntensityAu);
}

double field_to_intensity(double e0_au) {
  if (!(e0_au >= 0.0)) throw InvalidInput("field amplitude must be non-negative");
  return e0_au * e0_au * kIntensityAu;
}

}  // namespace crosc::units
