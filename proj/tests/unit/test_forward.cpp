#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support/gen.hpp"
#include "vtract/forward.hpp"
#include "vtract/oracles.hpp"

using namespace vtract;
using vtract::testing::Gen;

namespace {

constexpr cplx kI{0.0, 1.0};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

cplx oracle_G(cplx k, const RadiusProfile& p) {
  switch (p.family()) {
    case Family::uniform: return oracle_G_uniform(k, p.r0_param(), p.ell());
    case Family::linear:
      return oracle_G_linear(k, p.r0_param(), p.r0p_param(), p.ell());
    default:
      return oracle_G_quadratic(k, p.r0_param(), p.r0p_param(), p.ell());
  }
}

}  // namespace

TEST_CASE("property: G matches the closed forms of its family") {
  Gen gen(61);
  for (int i = 0; i < 40; ++i) {
    const auto p = gen.profile();
    ForwardModel m(p);
    for (int j = 0; j < 5; ++j) {
      const cplx k = gen.complex(0.3, 20.0, -1.0, 1.0);
      CHECK(rel(m.G(k), oracle_G(k, p)) < 1e-8);
    }
  }
}

TEST_CASE("property: reflection symmetries G(-k*) = G(k)*, F(-k*) = -F(k)*") {
  Gen gen(62);
  for (int i = 0; i < 40; ++i) {
    const auto p = gen.profile();
    ForwardModel m(p);
    const cplx k = gen.annulus(0.1, 20.0);
    CHECK(rel(m.G(-std::conj(k)), std::conj(m.G(k))) < 1e-10);
    CHECK(rel(m.F(-std::conj(k)), -std::conj(m.F(k))) < 1e-10);
  }
}

TEST_CASE("uniform tube has F(k) = k") {
  ForwardModel m(RadiusProfile::uniform(1.0, 17.0));
  for (cplx k : {cplx(0.5), cplx(3.0, 1.0), cplx(-7.0, -0.5)}) {
    CHECK(rel(m.F(k), k) < 1e-8);
  }
}

TEST_CASE("property: G vanishes at 0 with slope -i r_ell/r0") {
  Gen gen(63);
  for (int i = 0; i < 30; ++i) {
    const auto p = gen.profile();
    ForwardModel m(p);
    const double h = 1e-6;
    const cplx slope = (m.G(h) - m.G(-h)) / (2.0 * h);
    const cplx expect = -kI * p.endpoints().r_ell / p.endpoints().r0;
    CHECK(std::abs(m.G(0.0)) < 1e-14);
    CHECK(rel(slope, expect) < 1e-6);
  }
}

TEST_CASE("property: lip pressure is the field at x = ell and P = Z U there") {
  Gen gen(64);
  for (int i = 0; i < 20; ++i) {
    const auto p = gen.profile();
    ForwardModel m(p);
    const cplx k = gen.complex(0.2, 15.0, -0.2, 0.3);
    const cplx P = m.lip_pressure(k);
    CHECK(rel(m.pressure(k, p.ell()), P) < 1e-9);
    CHECK(rel(P / m.volume_velocity(k, p.ell()),
              lip_impedance(k, m.impedance(), m.constants())) < 1e-9);
    CHECK(rel(m.volume_velocity(k, 0.0), 1.0) < 1e-10);
  }
}

TEST_CASE("property: pressure solves the horn equation (r^2 P')' + k^2 r^2 P = 0") {
  Gen gen(65);
  for (int i = 0; i < 15; ++i) {
    const auto p = gen.profile();
    ForwardModel m(p);
    const cplx k = gen.complex(0.3, 8.0, 0.0, 0.2);
    const double x = gen.uniform(0.5, p.ell() - 0.5), h = 1e-4;
    auto flux = [&](double t) {
      const double r = p.radius(t);
      return r * r * m.pressure_derivative(k, t);
    };
    const cplx lhs = (flux(x + h) - flux(x - h)) / (2.0 * h);
    const double r = p.radius(x);
    const cplx rhs = -k * k * r * r * m.pressure(k, x);
    CHECK(std::abs(lhs - rhs) < 1e-5 * std::max(1.0, std::abs(rhs)));
    // U' from the field and by differencing U.
    const cplx du = (m.volume_velocity(k, x + h) - m.volume_velocity(k, x - h)) / (2.0 * h);
    CHECK(std::abs(du - m.volume_velocity_derivative(k, x)) <
          1e-6 * std::max(1.0, std::abs(du)));
  }
}

TEST_CASE("lip pressure limits at small and large k") {
  const auto p = vtract::testing::quadratic_example();
  ForwardModel m(p);
  const auto& e = p.endpoints();
  const double cmu = m.constants().c * m.constants().mu;
  const double k_small = 1e-4;
  CHECK(std::abs(m.lip_pressure(k_small)) / k_small ==
        doctest::Approx(8.0 * cmu / (3.0 * std::numbers::pi * std::numbers::pi * e.r_ell))
            .epsilon(1e-4));
  // Plateau c mu / (pi r0 r_ell), approached like 1/k.
  const double plateau = cmu / (std::numbers::pi * e.r0 * e.r_ell);
  double mean = 0.0;
  for (int i = 0; i < 200; ++i) mean += std::abs(m.lip_pressure(200.0 + 0.05 * i));
  CHECK(mean / 200.0 == doctest::Approx(plateau).epsilon(0.01));
}

TEST_CASE("gamma by quadrature equals the profile's closed form") {
  Gen gen(66);
  for (int i = 0; i < 20; ++i) {
    const auto p = gen.profile();
    CHECK(ForwardModel(p).gamma() == doctest::Approx(p.gamma()).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("lip pressure at a zero of G raises PoleError") {
  // Newton from the lossless resonance pi/(2 ell) of the uniform tube.
  ForwardModel m(RadiusProfile::uniform(0.5, 17.0));
  cplx k = std::numbers::pi / 34.0;
  for (int it = 0; it < 60; ++it) {
    const double h = 1e-7;
    const cplx d = (m.G(k + h) - m.G(k - h)) / (2.0 * h);
    k -= m.G(k) / d;
  }
  REQUIRE(std::abs(m.G(k)) < 1e-13);
  CHECK_THROWS_AS(m.lip_pressure(k), PoleError);
  try {
    m.lip_pressure(k);
  } catch (const PoleError& e) {
    CHECK(e.kind() == ErrorKind::numeric);
    CHECK(std::abs(e.k() - k) < 1e-15);
  }
}

TEST_CASE("sweep is independent of the thread count") {
  ForwardModel m(vtract::testing::quadratic_example());
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(97, 0.1, 30.0);
  const auto a = sweep(m, Quantity::P_lips, k, 1);
  const auto b = sweep(m, Quantity::P_lips, k, 3);
  CHECK(a.label == Quantity::P_lips);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  const auto g = sweep(m, Quantity::G, k, 2);
  CHECK(g.values[5] == m.G(k[5]));
  CHECK(to_string(Quantity::P_lips_abs) == "P_lips_abs");
}

TEST_CASE("parallel_map collects failures into one error") {
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(20, 0.0, 19.0);
  auto eval = [](double x) -> cplx {
    if (static_cast<int>(x) % 7 == 3) throw Error(ErrorKind::numeric, "bad");
    return x;
  };
  try {
    parallel_map(eval, k, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
    CHECK(std::string(e.what()).find("3 point(s) [3, 10, 17]") != std::string::npos);
  }
}
