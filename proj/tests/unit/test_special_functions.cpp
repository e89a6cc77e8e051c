#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "support/gen.hpp"
#include "vtract/quadrature.hpp"
#include "vtract/special_functions.hpp"

using namespace vtract;
using vtract::testing::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

cplx integrate_c(const std::function<cplx(double)>& f, double a, double b,
                 int panels = 200) {
  const double re = integrate_gl([&](double t) { return f(t).real(); }, a, b,
                                 panels, 20);
  const double im = integrate_gl([&](double t) { return f(t).imag(); }, a, b,
                                 panels, 20);
  return {re, im};
}

// Bessel's integral.
cplx j1_integral(cplx w) {
  return integrate_c([&](double th) { return std::cos(th - w * std::sin(th)); },
                     0.0, kPi) /
         kPi;
}

// Schlaefli's integral, Re w > 0.
cplx y1_integral(cplx w) {
  const cplx a = integrate_c(
      [&](double th) { return std::sin(w * std::sin(th) - th); }, 0.0, kPi);
  const cplx b = integrate_c(
      [&](double t) {
        return (std::exp(t) - std::exp(-t)) * std::exp(-w * std::sinh(t));
      },
      0.0, 9.0, 400);
  return (a - b) / kPi;
}

// Struve's integral H1(w) = (2w/pi) \int_0^1 sqrt(1 - t^2) sin(w t) dt,
// substituted t = sin(s) to remove the endpoint singularity.
cplx h1_integral(cplx w) {
  return 2.0 * w / kPi *
         integrate_c(
             [&](double s) {
               const double c = std::cos(s);
               return c * c * std::sin(w * std::sin(s));
             },
             0.0, kPi / 2.0);
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("tabulated values at w = 1 and w = 10") {
  CHECK(bessel_j1(1.0).real() == doctest::Approx(0.4400505857449335).epsilon(1e-14));
  CHECK(bessel_y1(1.0).real() == doctest::Approx(-0.7812128213002887).epsilon(1e-14));
  CHECK(struve_h1(1.0).real() == doctest::Approx(0.1984573362019444).epsilon(1e-14));
  CHECK(bessel_y1(10.0).real() == doctest::Approx(0.24901542420695388).epsilon(1e-13));
  CHECK(std::abs(bessel_j1(1.0).imag()) < 1e-16);
}

TEST_CASE("property: J1 and H1 agree with their integral representations") {
  Gen gen(21);
  for (int i = 0; i < 60; ++i) {
    const cplx w = gen.complex(-25.0, 25.0, -6.0, 6.0);
    CHECK(rel(bessel_j1(w), j1_integral(w)) < 1e-11);
    CHECK(rel(struve_h1(w), h1_integral(w)) < 1e-11);
  }
}

TEST_CASE("property: Y1 agrees with the Schlaefli integral") {
  Gen gen(22);
  for (int i = 0; i < 60; ++i) {
    const cplx w = gen.complex(0.5, 25.0, -6.0, 6.0);
    CHECK(rel(bessel_y1(w), y1_integral(w)) < 1e-10);
  }
}

TEST_CASE("property: parity and conjugation") {
  Gen gen(23);
  for (int i = 0; i < 100; ++i) {
    const cplx w = gen.annulus(0.1, 40.0);
    CHECK(rel(bessel_j1(-w), -bessel_j1(w)) < 1e-13);
    CHECK(rel(struve_h1(-w), struve_h1(w)) < 1e-13);
    CHECK(rel(bessel_j1(std::conj(w)), std::conj(bessel_j1(w))) < 1e-13);
    CHECK(rel(struve_h1(std::conj(w)), std::conj(struve_h1(w))) < 1e-13);
  }
}

TEST_CASE("property: series and asymptotic forms overlap near the switch") {
  Gen gen(24);
  for (int i = 0; i < 50; ++i) {
    const double r = gen.uniform(kSeriesSwitch, kSeriesSwitch + 8.0);
    const cplx w = std::polar(r, gen.uniform(-1.2, 1.2));
    CHECK(rel(bessel_j1_asymptotic(w), j1_integral(w)) < 1e-10);
    CHECK(rel(bessel_y1_asymptotic(w), y1_integral(w)) < 1e-9);
    // The divergent H1 - Y1 series stalls near e^{-|w|}; struve_h1 covers the gap.
    CHECK(rel(struve_h1_asymptotic(w), h1_integral(w)) < 1e-6);
    CHECK(rel(struve_h1(w), h1_integral(w)) < 1e-11);
  }
}

TEST_CASE("Wronskian J1 Y1' - J1' Y1 = 2/(pi w)") {
  Gen gen(25);
  const double h = 1e-5;
  for (int i = 0; i < 40; ++i) {
    const cplx w = gen.complex(0.5, 30.0, -3.0, 3.0);
    const cplx dj = (bessel_j1(w + h) - bessel_j1(w - h)) / (2.0 * h);
    const cplx dy = (bessel_y1(w + h) - bessel_y1(w - h)) / (2.0 * h);
    const cplx W = bessel_j1(w) * dy - dj * bessel_y1(w);
    CHECK(std::abs(W * w * kPi / 2.0 - 1.0) < 1e-7);
  }
}

TEST_CASE("argument outside double range is rejected") {
  CHECK_THROWS_AS(bessel_j1(cplx(1.0, 2.0 * kMaxImag)), Error);
}

TEST_CASE("Y1 is singular at the origin") {
  CHECK_THROWS_AS(bessel_y1(0.0), Error);
}
