#include "vtract/oracles.hpp"

#include <cmath>
#include <numbers>

#include "vtract/impedance.hpp"
#include "vtract/quadrature.hpp"
#include "vtract/schrodinger.hpp"

namespace vtract {

namespace {

constexpr cplx I(0.0, 1.0);

void require_class_a(double r0, double r_ell) {
  if (!(r0 > 0.0) || !(r_ell > 0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "oracle parameters leave the admissible class");
  }
}

cplx small_k(cplx k, double r0, double r_ell) { return -I * k * r_ell / r0; }

}  // namespace

cplx oracle_G_uniform(cplx k, double r0, double ell) {
  require_class_a(r0, r0);
  const cplx z = z_eval(k, ImpedanceModel(r0));
  return -I * k * std::cos(k * ell) + k * z * std::sin(k * ell);
}

cplx oracle_G_linear(cplx k, double r0, double r0p, double ell) {
  const double r_ell = r0 + ell * r0p;
  require_class_a(r0, r_ell);
  if (std::abs(k) < kOracleSmallK) return small_k(k, r0, r_ell);
  const cplx z = z_eval(k, ImpedanceModel(r_ell));
  const cplx q1 = -(r0p - I * k * r0) *
                  (k * ell * r0p * (z - 1.0) + k * r0 * (z - 1.0) - I * z * r0p);
  const cplx q2 = -(r0p + I * k * r0) *
                  (k * ell * r0p * (1.0 + z) + k * r0 * (1.0 + z) + I * z * r0p);
  return (std::exp(-I * k * ell) * q1 + std::exp(I * k * ell) * q2) /
         (2.0 * k * r0 * r_ell);
}

cplx oracle_G_quadratic(cplx k, double r0, double r0p, double ell) {
  const double root = std::sqrt(r0) + ell * r0p / (2.0 * std::sqrt(r0));
  const double r_ell = root * root;
  require_class_a(r0, root > 0.0 ? r_ell : -1.0);
  if (std::abs(k) < kOracleSmallK) return small_k(k, r0, r_ell);
  const cplx z = z_eval(k, ImpedanceModel(r_ell));
  const double p = r0p, p2 = p * p, p3 = p2 * p, p4 = p2 * p2;
  const double l = ell, l2 = ell * ell;
  const double r2 = r0 * r0, r3 = r2 * r0, r4 = r2 * r2;
  const cplx k2 = k * k, k3 = k2 * k, k4 = k2 * k2;

  const cplx q3 = -24.0 * z * l * r2 * p2 - 12.0 * z * l2 * r0 * p3;
  const double q4 = 32.0 * r4 + 32.0 * l * r3 * p + 8.0 * l2 * r2 * p2;
  const cplx q5 = 24.0 * z * r2 * p2 + 12.0 * z * l * r0 * p3 -
                  6.0 * z * l2 * p4;
  const double q6 = 32.0 * r3 * p + 40.0 * l * r2 * p2 + 12.0 * l2 * r0 * p3;
  const cplx q7 = 32.0 * z * r4 + 32.0 * z * l * r3 * p + 8.0 * z * l2 * r2 * p2;
  const cplx q1 = -18.0 * I * k * z * l * p4 -
                  k2 * (12.0 * l * r0 * p3 + 6.0 * l2 * p4) + I * k3 * q3 +
                  k4 * q4;
  const cplx q2 = 18.0 * I * z * p4 + k * (12.0 * r0 * p3 + 6.0 * l * p4) +
                  I * k2 * q5 + k3 * q6 + I * k4 * q7;
  const double d = 2.0 * r0 + l * p;
  return (q1 * std::cos(k * ell) + q2 * std::sin(k * ell)) /
         (8.0 * I * k3 * r2 * d * d);
}

Eigen::Vector2cd oracle_jost(cplx k, const RadiusProfile& profile, double x) {
  const double ell = profile.ell();
  switch (profile.family()) {
    case Family::uniform:
    case Family::linear: {
      const cplx e = std::exp(I * k * x);
      return {e, I * k * e};
    }
    case Family::quadratic: {
      if (k == cplx(0.0)) {
        throw Error(ErrorKind::invalid_argument,
                    "quadratic Jost basis is singular at k = 0");
      }
      const double a = profile.quad_a();
      const double b = profile.quad_b();
      // Basis e^{ikx} m(k,x), e^{-ikx} m(-k,x), m(k,x) = 1 + ia/(k(ax+b)).
      auto basis = [&](cplx kk, double t) {
        const double s = a * t + b;
        const cplx m = 1.0 + I * a / (kk * s);
        const cplx mp = -I * a * a / (kk * s * s);
        const cplx e = std::exp(I * kk * t);
        return Eigen::Vector2cd(e * m, e * (I * kk * m + mp));
      };
      const Eigen::Vector2cd u1l = basis(k, ell), u2l = basis(-k, ell);
      const cplx el = std::exp(I * k * ell);
      const Eigen::Vector2cd target(el, I * k * el);
      const cplx w = u1l[0] * u2l[1] - u1l[1] * u2l[0];
      const cplx alpha = (target[0] * u2l[1] - target[1] * u2l[0]) / w;
      const cplx beta = (u1l[0] * target[1] - u1l[1] * target[0]) / w;
      return alpha * basis(k, x) + beta * basis(-k, x);
    }
    case Family::sampled: {
      const SchrodingerSolver solver(profile);
      return solver.at(SolutionKind::jost, k, x);
    }
  }
  return {};
}

Eigen::Vector2cd oracle_g0_jost_matrix(cplx k, const RadiusProfile& profile) {
  if (k == cplx(0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "Jost-matrix assembly is singular at k = 0");
  }
  const auto& e = profile.endpoints();
  const double ell = profile.ell();
  const Eigen::Vector2cd fp = oracle_jost(k, profile, 0.0);
  const Eigen::Vector2cd fm = oracle_jost(-k, profile, 0.0);
  Eigen::Matrix2cd basis0;
  basis0 << fp[0], fm[0], fp[1], fm[1];
  const cplx ep = std::exp(I * k * ell), em = std::exp(-I * k * ell);
  Eigen::Matrix2cd basis_l;
  basis_l << ep, em, I * k * ep, -I * k * em;
  const cplx z = z_eval(k, ImpedanceModel(e.r_ell));
  const Eigen::Vector2cd anchor(z, (e.r_ell_prime / e.r_ell) * z - I * k);
  // Closed-form 2x2 inverse.
  const cplx det = basis_l(0, 0) * basis_l(1, 1) - basis_l(0, 1) * basis_l(1, 0);
  Eigen::Matrix2cd inv;
  inv << basis_l(1, 1), -basis_l(0, 1), -basis_l(1, 0), basis_l(0, 0);
  inv /= det;
  return basis0 * (inv * anchor);
}

cplx oracle_G_jost_matrix(cplx k, const RadiusProfile& profile) {
  const auto& e = profile.endpoints();
  const Eigen::Vector2cd g0 = oracle_g0_jost_matrix(k, profile);
  return -(e.r0_prime / e.r0) * g0[0] + g0[1];
}

double oracle_z_imaginary(double kappa, double r_ell) {
  // t = sin(theta) removes the square-root endpoint singularity.
  const double integral = integrate_adaptive(
      [&](double th) {
        const double c = std::cos(th);
        return c * c * std::exp(2.0 * kappa * r_ell * std::sin(th));
      },
      0.0, 0.5 * std::numbers::pi, 1e-15, 1e-14);
  return 1.0 - 4.0 / std::numbers::pi * integral;
}

}  // namespace vtract
