#pragma once

#include <numbers>

#include "vtract/error.hpp"

namespace vtract {

struct PhysicalConstants {
  double c = 3.5e4;    // sound speed, cm/s
  double mu = 1.14e-3; // air density, g/cm^3

  void validate() const {
    if (!(c > 0.0) || !(mu > 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "physical constants must be positive");
    }
  }

  // Wavenumber in rad/cm for a frequency in Hz.
  double wavenumber(double nu) const { return 2.0 * std::numbers::pi * nu / c; }
  double frequency(double k) const { return k * c / (2.0 * std::numbers::pi); }
};

}  // namespace vtract
