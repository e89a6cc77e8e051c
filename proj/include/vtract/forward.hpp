#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

#include "vtract/constants.hpp"
#include "vtract/impedance.hpp"
#include "vtract/profile.hpp"
#include "vtract/schrodinger.hpp"

namespace vtract {

enum class Quantity { G, F, P_lips, P_lips_abs, phi_ell, phi_prime_ell, z };

std::string to_string(Quantity q);

struct SpectralCurve {
  Eigen::VectorXd k;
  Eigen::VectorXcd values;
  Quantity label = Quantity::G;

  Eigen::Index size() const { return k.size(); }
};

inline constexpr double kPoleThreshold = 1e-12;

/// Direct-problem solver for one profile; all members are const and may be
/// called concurrently.
class ForwardModel {
 public:
  explicit ForwardModel(RadiusProfile profile, PhysicalConstants constants = {},
                        SolverOptions options = {});
  // Explicit impedance model, e.g. with non-default series settings.
  ForwardModel(RadiusProfile profile, ImpedanceModel impedance,
               PhysicalConstants constants = {}, SolverOptions options = {});

  const RadiusProfile& profile() const { return solver_.profile(); }
  const ImpedanceModel& impedance() const { return impedance_; }
  const PhysicalConstants& constants() const { return constants_; }
  const SchrodingerSolver& solver() const { return solver_; }

  State phi_ell(cplx k) const;
  cplx G(cplx k) const;
  cplx F(cplx k) const;
  cplx g0(cplx k) const;  // g(k, 0)

  cplx pressure(cplx k, double x) const;
  cplx pressure_derivative(cplx k, double x) const;
  cplx lip_pressure(cplx k) const;
  cplx volume_velocity(cplx k, double x) const;
  cplx volume_velocity_derivative(cplx k, double x) const;

  cplx evaluate(Quantity q, cplx k) const;

  // r0'/r0 + (1/2) \int q, the integral by composite Gauss-Legendre.
  double gamma() const;

 private:
  // psi = (g0/G) phi + S at x, with the pole check on G.
  State field(cplx k, double x) const;

  SchrodingerSolver solver_;
  ImpedanceModel impedance_;
  PhysicalConstants constants_;
};

// Parallel map of `eval` over `k`; per-point failures are collected and
// reported together. threads = 0 picks the hardware concurrency.
Eigen::VectorXcd parallel_map(const std::function<cplx(double)>& eval,
                              const Eigen::VectorXd& k, int threads = 0);

SpectralCurve sweep(const ForwardModel& model, Quantity quantity,
                    const Eigen::VectorXd& k_grid, int threads = 0);

cplx G_eval(cplx k, const RadiusProfile& profile, const ImpedanceModel& model);
cplx jost_function(cplx k, const RadiusProfile& profile);
cplx pressure(cplx k, double x, const RadiusProfile& profile,
              const ImpedanceModel& model, const PhysicalConstants& constants);
cplx lip_pressure(cplx k, const RadiusProfile& profile,
                  const ImpedanceModel& model,
                  const PhysicalConstants& constants);
cplx volume_velocity(cplx k, double x, const RadiusProfile& profile,
                     const PhysicalConstants& constants);

}  // namespace vtract
