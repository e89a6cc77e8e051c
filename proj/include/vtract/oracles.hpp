#pragma once

#include <Eigen/Core>

#include "vtract/error.hpp"
#include "vtract/profile.hpp"

namespace vtract {

// Closed-form reference values used as ground truth by tests and the
// roundtrip report. Below |k| = kOracleSmallK the removable k-powers of the
// displayed formulas are avoided by the linear small-k expansion of G.
inline constexpr double kOracleSmallK = 1e-3;

cplx oracle_G_uniform(cplx k, double r0, double ell);
cplx oracle_G_linear(cplx k, double r0, double r0p, double ell);
cplx oracle_G_quadratic(cplx k, double r0, double r0p, double ell);

// Jost solution (f, f') at x for the closed-form families.
Eigen::Vector2cd oracle_jost(cplx k, const RadiusProfile& profile, double x);

// (g(k,0), g'(k,0)) from the Jost basis at x = 0 and the lip anchor.
Eigen::Vector2cd oracle_g0_jost_matrix(cplx k, const RadiusProfile& profile);

// G = [-r0'/r0, 1] (g(k,0), g'(k,0))^T through the same matrix product.
cplx oracle_G_jost_matrix(cplx k, const RadiusProfile& profile);

// z(i kappa) = 1 - (4/pi) \int_0^1 e^{2 kappa r t} sqrt(1 - t^2) dt
double oracle_z_imaginary(double kappa, double r_ell);

}  // namespace vtract
