#include "vtract/impedance.hpp"

#include <cmath>
#include <numbers>

#include "vtract/special_functions.hpp"

namespace vtract {

namespace {

using lcplx = std::complex<long double>;

constexpr long double kPiL = 3.141592653589793238462643383279502884L;

// Both series carry the 1/(k r) division analytically, so z is summed
// without cancellation against the leading 1 and vanishes exactly at k = 0.
cplx z_series(cplx k, const ImpedanceModel& model) {
  const lcplx h = lcplx(k) * static_cast<long double>(model.r_ell);  // w/2
  const lcplx u = -h * h;
  // 1 - 2 J1(w)/w = sum_{j>=1} (-1)^{j+1} h^{2j} / (j! (j+1)!)
  lcplx jt = -u / 2.0L;
  lcplx jsum = jt;
  // 2 H1(w)/w = sum_{j>=0} (-1)^j h^{2j+1} / (Gamma(j+3/2) Gamma(j+5/2))
  lcplx ht = h * (8.0L / (3.0L * kPiL));
  lcplx hsum = ht;
  for (int j = 1; j < model.series_terms; ++j) {
    jt *= u / static_cast<long double>((j + 1) * (j + 2));
    ht *= u / ((j + 0.5L) * (j + 1.5L));
    jsum += jt;
    hsum += ht;
    const long double scale = std::abs(jsum) + std::abs(hsum);
    if (std::abs(jt) + std::abs(ht) <= 1e-22L * scale) break;
  }
  const lcplx z = jsum + lcplx(0.0L, 1.0L) * hsum;
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

}  // namespace

void ImpedanceModel::validate() const {
  if (!(r_ell > 0.0) || !std::isfinite(r_ell)) {
    throw Error(ErrorKind::invalid_argument, "impedance: r_ell must be > 0");
  }
  if (series_terms < 8) {
    throw Error(ErrorKind::invalid_argument,
                "impedance: series_terms must be at least 8");
  }
  if (!(switch_radius > 0.0) || switch_radius > 16.0) {
    throw Error(ErrorKind::invalid_argument,
                "impedance: switch radius outside the series range");
  }
}

cplx z_eval(cplx k, const ImpedanceModel& model) {
  if (k == cplx(0.0)) return 0.0;
  if (std::abs(k) * model.r_ell <= model.switch_radius) {
    return z_series(k, model);
  }
  return z_asymptotic(k, model);
}

cplx z_asymptotic(cplx k, const ImpedanceModel& model) {
  const cplx kr = k * model.r_ell;
  if (std::abs(kr) < model.switch_radius * (1.0 - 1e-12)) {
    throw Error(ErrorKind::invalid_argument,
                "z_asymptotic: |k r_ell| below the switch radius");
  }
  cplx w = 2.0 * kr;
  if (std::abs(w.imag()) > kMaxImag) {
    throw Error(ErrorKind::numeric, "z_asymptotic: |Im k r_ell| overflows");
  }
  // 2 J1(w)/w is even and 2 H1(w)/w is odd in w.
  double odd_sign = 1.0;
  if (w.real() < 0.0) {
    w = -w;
    odd_sign = -1.0;
  }
  const cplx j_ratio = 2.0 * bessel_j1_asymptotic(w) / w;
  // struve_h1 bridges the band where the divergent H1 - Y1 series stalls.
  const cplx h_ratio = 2.0 * struve_h1(w) / w;
  return 1.0 - j_ratio + cplx(0.0, odd_sign) * h_ratio;
}

cplx b_factor(cplx kr) {
  return cplx(1.0, -1.0) * std::exp(cplx(0.0, -2.0) * kr) /
         std::sqrt(2.0 * std::numbers::pi * kr);
}

cplx z_leading(cplx k, const ImpedanceModel& model) {
  const cplx kr = k * model.r_ell;
  return 1.0 + (cplx(0.0, 2.0 / std::numbers::pi) + b_factor(kr)) / kr;
}

cplx lip_impedance(cplx k, const ImpedanceModel& model,
                   const PhysicalConstants& constants) {
  return constants.c * constants.mu * z_eval(k, model) /
         (std::numbers::pi * model.r_ell * model.r_ell);
}

}  // namespace vtract
