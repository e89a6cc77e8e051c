#pragma once

#include "vtract/constants.hpp"
#include "vtract/error.hpp"

namespace vtract {

/// Normalized piston-in-baffle impedance at the lips,
///   z(k) = 1 - J1(2 k r) / (k r) + i H1(2 k r) / (k r),  r = r_ell.
struct ImpedanceModel {
  double r_ell = 1.0;
  int series_terms = 80;
  double switch_radius = 12.0;  // on |k r_ell|

  ImpedanceModel() = default;
  explicit ImpedanceModel(double r) : r_ell(r) {}

  void validate() const;
};

// Entire-function evaluation; z(0) = 0.
cplx z_eval(cplx k, const ImpedanceModel& model);

// Large-argument path (Hankel expansions of J1 and Y1 plus the Struve
// correction series); requires |k r_ell| >= switch_radius.
cplx z_asymptotic(cplx k, const ImpedanceModel& model);

// Two-term model 1 + (1/(k r)) [2i/pi + B(k r)].
cplx z_leading(cplx k, const ImpedanceModel& model);

// B(w) = (1 - i) e^{-2 i w} / sqrt(2 pi w)
cplx b_factor(cplx kr);

// Dimensional lip impedance Z = c mu z / (pi r_ell^2).
cplx lip_impedance(cplx k, const ImpedanceModel& model,
                   const PhysicalConstants& constants = {});

}  // namespace vtract
