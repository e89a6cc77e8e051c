#pragma once

#include "vtract/error.hpp"

namespace vtract {

// |w| at or below which the power series are summed (in long double).
inline constexpr double kSeriesSwitch = 16.0;
// Largest |Im w| accepted before exp(|Im w|) leaves double range.
inline constexpr double kMaxImag = 700.0;

cplx bessel_j1(cplx w);
cplx bessel_y1(cplx w);
cplx struve_h1(cplx w);

// Large-|w| forms, valid for Re w >= 0 (callers reduce by symmetry).
cplx bessel_j1_asymptotic(cplx w);
cplx bessel_y1_asymptotic(cplx w);
cplx struve_h1_asymptotic(cplx w);

}  // namespace vtract
