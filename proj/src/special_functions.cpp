#include "vtract/special_functions.hpp"

#include <cmath>
#include <numbers>

#include "vtract/quadrature.hpp"

namespace vtract {

namespace {

using lcplx = std::complex<long double>;

constexpr long double kPiL = 3.141592653589793238462643383279502884L;
constexpr long double kEulerL = 0.577215664901532860606512090082402431L;
constexpr int kMaxSeriesTerms = 200;
// Below this modulus the divergent H1 - Y1 series stalls near e^{-|w|}.
constexpr double kStruveLaplaceLimit = 34.0;

void check_range(cplx w, const char* name) {
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
    throw Error(ErrorKind::numeric, std::string(name) + ": non-finite argument");
  }
  if (std::abs(w.imag()) > kMaxImag) {
    throw Error(ErrorKind::numeric,
                std::string(name) + ": |Im w| = " +
                    std::to_string(std::abs(w.imag())) + " overflows");
  }
}

cplx to_double(lcplx v) {
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

// J1(w) = (w/2) sum_j (-(w/2)^2)^j / (j! (j+1)!)
lcplx j1_series(lcplx w) {
  const lcplx h = w / 2.0L;
  const lcplx u = -h * h;
  lcplx term = h;
  lcplx sum = term;
  for (int j = 0; j < kMaxSeriesTerms; ++j) {
    term *= u / static_cast<long double>((j + 1) * (j + 2));
    sum += term;
    if (std::abs(term) <= 1e-22L * std::abs(sum)) break;
  }
  return sum;
}

// H1(w) = sum_j (-1)^j (w/2)^(2j+2) / (Gamma(j+3/2) Gamma(j+5/2))
lcplx h1_series(lcplx w) {
  const lcplx h = w / 2.0L;
  const lcplx u = -h * h;
  lcplx term = h * h * (8.0L / (3.0L * kPiL));
  lcplx sum = term;
  for (int j = 0; j < kMaxSeriesTerms; ++j) {
    term *= u / ((j + 1.5L) * (j + 2.5L));
    sum += term;
    if (std::abs(term) <= 1e-22L * std::abs(sum)) break;
  }
  return sum;
}

lcplx y1_series(lcplx w) {
  const lcplx h = w / 2.0L;
  const lcplx u = -h * h;
  // psi(k+1) + psi(k+2) with psi(1) = -gamma_E
  long double psi1 = -kEulerL;
  long double psi2 = 1.0L - kEulerL;
  lcplx term = h;
  lcplx sum = (psi1 + psi2) * term;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    term *= u / static_cast<long double>((k + 1) * (k + 2));
    psi1 += 1.0L / (k + 1);
    psi2 += 1.0L / (k + 2);
    const lcplx add = (psi1 + psi2) * term;
    sum += add;
    if (std::abs(add) <= 1e-22L * std::abs(sum)) break;
  }
  return (2.0L / kPiL) * std::log(h) * j1_series(w) - 2.0L / (kPiL * w) -
         sum / kPiL;
}

// Hankel expansion P, Q for order one; truncated at the smallest term.
void hankel_pq(cplx w, cplx& p, cplx& q) {
  const double mu = 4.0;
  p = 1.0;
  q = 0.0;
  cplx term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0) / w;
    const double mag = std::abs(term);
    if (mag > last) break;
    last = mag;
    // a_k / w^k with sign (-1)^{floor(k/2)} split by parity into P and Q
    const cplx signed_term = ((k / 2) % 2 == 0) ? term : -term;
    if (k % 2 == 0) {
      p += signed_term;
    } else {
      q += signed_term;
    }
    if (mag < 1e-17) break;
  }
}

// H1 - Y1 = (2/pi) int_0^inf e^{-u} sqrt(1 + (u/w)^2) du, the Laplace integral
// with its ray turned onto the real axis. Valid for Re w > 0; the branch points
// u = +-iw stay at least |w|/2 from the path when |arg w| <= pi/3.
cplx struve_minus_y1_laplace(cplx w) {
  const QuadratureRule& rule = gauss_legendre(16);
  constexpr int kPanels = 32;
  constexpr double kUpper = 48.0;  // e^{-48} is below double resolution
  constexpr double h = kUpper / kPanels;
  const cplx inv = 1.0 / w;
  cplx sum = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double mid = (p + 0.5) * h;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
      const double u = mid + 0.5 * h * rule.nodes[i];
      const cplx t = u * inv;
      sum += rule.weights[i] * std::exp(-u) * std::sqrt(1.0 + t * t);
    }
  }
  return sum * (h / std::numbers::pi);
}

}  // namespace

cplx bessel_j1_asymptotic(cplx w) {
  cplx p, q;
  hankel_pq(w, p, q);
  const cplx omega = w - 0.75 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * w)) *
         (p * std::cos(omega) - q * std::sin(omega));
}

cplx bessel_y1_asymptotic(cplx w) {
  cplx p, q;
  hankel_pq(w, p, q);
  const cplx omega = w - 0.75 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * w)) *
         (p * std::sin(omega) + q * std::cos(omega));
}

cplx struve_h1_asymptotic(cplx w) {
  // H1 - Y1 ~ (1/pi) sum_k t_k (2/w)^{2k}, t_0 = 2, t_{k+1} = t_k (k+1/2)(1/2-k)
  const cplx s = (2.0 / w) * (2.0 / w);
  cplx term = 2.0;
  cplx sum = term;
  double last = 2.0;
  for (int k = 0; k < 60; ++k) {
    term *= (k + 0.5) * (0.5 - k) * s;
    const double mag = std::abs(term);
    if (mag > last) break;
    last = mag;
    sum += term;
    if (mag < 1e-17) break;
  }
  return bessel_y1_asymptotic(w) + sum / std::numbers::pi;
}

cplx bessel_j1(cplx w) {
  check_range(w, "bessel_j1");
  if (std::abs(w) <= kSeriesSwitch) return to_double(j1_series(lcplx(w)));
  if (w.real() < 0.0) return -bessel_j1_asymptotic(-w);
  return bessel_j1_asymptotic(w);
}

cplx bessel_y1(cplx w) {
  check_range(w, "bessel_y1");
  if (w == cplx(0.0)) {
    throw Error(ErrorKind::numeric, "bessel_y1: singular at w = 0");
  }
  if (std::abs(w) <= kSeriesSwitch) return to_double(y1_series(lcplx(w)));
  if (w.real() >= 0.0) return bessel_y1_asymptotic(w);
  // Continuation across the cut: Y1(v e^{m pi i}) = -(Y1(v) + 2 i m J1(v)).
  const cplx v = -w;
  const double m = v.imag() > 0.0 ? -1.0 : 1.0;
  return -(bessel_y1_asymptotic(v) +
           cplx(0.0, 2.0 * m) * bessel_j1_asymptotic(v));
}

cplx struve_h1(cplx w) {
  check_range(w, "struve_h1");
  if (std::abs(w) <= kSeriesSwitch) return to_double(h1_series(lcplx(w)));
  const cplx v = w.real() < 0.0 ? -w : w;  // H1 is even
  if (std::abs(v) < kStruveLaplaceLimit &&
      std::abs(std::arg(v)) <= std::numbers::pi / 3.0) {
    return bessel_y1_asymptotic(v) + struve_minus_y1_laplace(v);
  }
  return struve_h1_asymptotic(v);
}

}  // namespace vtract
