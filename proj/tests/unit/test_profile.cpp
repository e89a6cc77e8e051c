#include <doctest.h>

#include <cmath>

#include "support/gen.hpp"
#include "vtract/quadrature.hpp"

using namespace vtract;
using vtract::testing::Gen;

namespace {

// Central second difference of the radius, as an independent q = r''/r.
double fd_potential(const RadiusProfile& p, double x) {
  const double h = 1e-3;
  const double d2 =
      (p.radius(x + h) - 2.0 * p.radius(x) + p.radius(x - h)) / (h * h);
  return d2 / p.radius(x);
}

}  // namespace

TEST_CASE("closed-form families match their defining polynomials") {
  const auto u = RadiusProfile::uniform(1.5, 10.0);
  CHECK(u.radius(3.0) == 1.5);
  CHECK(u.endpoints().r_ell == 1.5);
  CHECK(u.gamma() == 0.0);

  const auto l = RadiusProfile::linear(1.0, 0.05, 10.0);
  CHECK(l.radius(4.0) == doctest::Approx(1.2));
  CHECK(l.endpoints().r_ell == doctest::Approx(1.5));
  CHECK(l.endpoints().r_ell_prime == doctest::Approx(0.05));
  CHECK(l.gamma() == doctest::Approx(0.05));

  // r = r0 + r0' x + r0'^2 x^2 / (4 r0) is the expanded square.
  const double r0 = 0.8, rp = 0.03, ell = 12.0;
  const auto q = RadiusProfile::quadratic(r0, rp, ell);
  for (double x : {0.0, 2.5, 7.0, 12.0}) {
    const double expect = r0 + rp * x + rp * rp * x * x / (4.0 * r0);
    CHECK(q.radius(x) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(q.slope(x) ==
          doctest::Approx(rp + rp * rp * x / (2.0 * r0)).epsilon(1e-13));
  }
  CHECK(q.endpoints().r_ell == doctest::Approx(q.radius(ell)));
  CHECK(q.endpoints().r_ell_prime == doctest::Approx(q.slope(ell)));
}

TEST_CASE("quadratic example lip radius") {
  const auto p = vtract::testing::quadratic_example();
  // r(x) = (a x + b)^2 with b = 5^{-1/4}: at ell = 17 the radius is 1.0783.
  CHECK(p.endpoints().r_ell == doctest::Approx(1.0782971011).epsilon(1e-9));
  CHECK(p.ell() == 17.0);
}

TEST_CASE("property: potential agrees with finite differences of r") {
  Gen gen(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = gen.profile();
    for (int i = 0; i < 5; ++i) {
      const double x = gen.uniform(0.05, p.ell() - 0.05);
      CHECK(p.potential(x) ==
            doctest::Approx(fd_potential(p, x)).epsilon(1e-4).scale(1.0));
    }
    CHECK(p.potential(-1.0) == 0.0);
    CHECK(p.potential(p.ell() + 1.0) == 0.0);
  }
}

TEST_CASE("property: gamma = r0'/r0 + half the integral of q") {
  Gen gen(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = gen.profile();
    const double integral = integrate_adaptive(
        [&](double x) { return p.potential(x); }, 0.0, p.ell(), 1e-13, 1e-12);
    const double expect = p.endpoints().r0_prime / p.r0_param() + 0.5 * integral;
    CHECK(p.gamma() == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("property: quadratic potential integral in closed form") {
  // r = s^2 with s'' = 0 gives q = 2 (s'/s)^2, so the integral is
  // 2 a^2 \int dx / (a x + b)^2 = 2 a (1/b - 1/(a ell + b)).
  Gen gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    const double ell = gen.uniform(5.0, 25.0);
    const double r0 = gen.uniform(0.3, 3.0);
    const double rp = gen.uniform(-0.6 * r0 / ell, 0.2);
    const auto p = RadiusProfile::quadratic(r0, rp, ell);
    const double b = std::sqrt(r0), a = rp / (2.0 * b);
    CHECK(p.potential_integral() ==
          doctest::Approx(2.0 * a * (1.0 / b - 1.0 / (a * ell + b)))
              .epsilon(1e-12));
  }
}

TEST_CASE("sampled profile interpolates a smooth table") {
  const auto ref = RadiusProfile::quadratic(0.6, 0.04, 15.0);
  const int n = 121;
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0.0, 15.0);
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r[i] = ref.radius(x[i]);
  const auto s = RadiusProfile::sampled(x, r);
  CHECK(s.family() == Family::sampled);
  CHECK(s.ell() == 15.0);
  for (double t : {0.3, 4.44, 9.1, 14.9}) {
    CHECK(s.radius(t) == doctest::Approx(ref.radius(t)).epsilon(1e-9));
    CHECK(s.potential(t) == doctest::Approx(ref.potential(t)).epsilon(1e-3));
  }
  CHECK(s.gamma() == doctest::Approx(ref.gamma()).epsilon(1e-4));
  CHECK(s.endpoints().r_ell_prime ==
        doctest::Approx(ref.endpoints().r_ell_prime).epsilon(1e-4));
}

TEST_CASE("factories reject inadmissible input") {
  CHECK_THROWS_AS(RadiusProfile::uniform(0.0, 10.0), Error);
  CHECK_THROWS_AS(RadiusProfile::uniform(1.0, -1.0), Error);
  CHECK_THROWS_AS(RadiusProfile::uniform(1.0, std::nan("")), Error);
  CHECK_THROWS_AS(RadiusProfile::linear(1.0, -0.2, 10.0), Error);
  CHECK_THROWS_AS(RadiusProfile::quadratic(1.0, -0.5, 10.0), Error);

  Eigen::VectorXd x(3), r(3);
  x << 0.0, 1.0, 2.0;
  r << 1.0, -1.0, 1.0;
  CHECK_THROWS_AS(RadiusProfile::sampled(x, r), Error);
  x << 0.5, 1.0, 2.0;
  r << 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(RadiusProfile::sampled(x, r), Error);

  try {
    RadiusProfile::linear(1.0, -0.2, 10.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
  CHECK_THROWS_AS(family_from_string("cone"), Error);
  CHECK(family_from_string("quadratic") == Family::quadratic);
  CHECK(to_string(Family::sampled) == "sampled");
}

TEST_CASE("coarse sampled tables cannot feed the potential") {
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(4, 0.0, 3.0);
  Eigen::VectorXd r = Eigen::VectorXd::Constant(4, 1.0);
  const auto s = RadiusProfile::sampled(x, r);
  CHECK_THROWS_AS(s.potential(1.0), Error);
  CHECK_THROWS_AS(potential_of(s), Error);
}

TEST_CASE("make_profile dispatches on family") {
  ProfileParams params;
  params.r0 = 2.0;
  params.r0_prime = 0.1;
  CHECK(make_profile(Family::linear, params, 5.0).radius(5.0) ==
        doctest::Approx(2.5));
  const auto pot = potential_of(make_profile(Family::quadratic, params, 5.0), 33);
  CHECK(pot.x.size() == 33);
  CHECK(pot.closed_form);
  CHECK(pot.q[0] > 0.0);
}
