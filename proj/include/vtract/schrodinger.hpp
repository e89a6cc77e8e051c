#pragma once

#include <Eigen/Core>

#include "vtract/error.hpp"
#include "vtract/impedance.hpp"
#include "vtract/profile.hpp"

namespace vtract {

// psi'' + k^2 psi = q(x) psi on [0, ell].
enum class SolutionKind {
  regular,    // phi(0) = 1, phi'(0) = r0'/r0
  sine,       // S(0) = 0, S'(0) = 1
  jost,       // f(ell) = e^{ik ell}, f'(ell) = ik e^{ik ell}
  impedance,  // g(ell) = z, g'(ell) = (r_ell'/r_ell) z - ik
};

enum class Integrator { magnus4, dopri5 };

struct SolverOptions {
  int grid_nodes = kDefaultGridNodes;
  Integrator integrator = Integrator::magnus4;
  double rtol = 1e-10;  // dopri5 only
  double atol = 1e-10;
};

using State = Eigen::Vector2cd;  // (psi, psi')

struct WaveFunction {
  cplx k;
  SolutionKind kind = SolutionKind::regular;
  Eigen::VectorXd x;
  Eigen::VectorXcd value;
  Eigen::VectorXcd derivative;

  State at(Eigen::Index i) const { return {value[i], derivative[i]}; }
};

bool anchored_at_glottis(SolutionKind kind);

class SchrodingerSolver {
 public:
  explicit SchrodingerSolver(RadiusProfile profile, SolverOptions options = {});

  const RadiusProfile& profile() const { return profile_; }
  const SolverOptions& options() const { return options_; }
  const Eigen::VectorXd& grid() const { return grid_; }

  // Fundamental matrix mapping (psi, psi') at x = 0 to x = ell; det = 1.
  Eigen::Matrix2cd transfer(cplx k) const;

  // Carries a state from `from` to `to` (either direction).
  State propagate(cplx k, const State& y, double from, double to) const;

  // Anchor data of a kind at its own endpoint. `model` is needed for the
  // impedance kind only.
  State anchor(SolutionKind kind, cplx k,
               const ImpedanceModel* model = nullptr) const;

  State at(SolutionKind kind, cplx k, double x,
           const ImpedanceModel* model = nullptr) const;

  WaveFunction solve(SolutionKind kind, cplx k,
                     const ImpedanceModel* model = nullptr) const;

 private:
  Eigen::Matrix2cd magnus_step(cplx k, double h, double q1, double q2,
                               bool inverse) const;
  State dopri5(cplx k, State y, double from, double to) const;

  RadiusProfile profile_;
  SolverOptions options_;
  Eigen::VectorXd grid_;
  Eigen::VectorXd q1_;  // q at the two Gauss points of each grid cell
  Eigen::VectorXd q2_;
};

WaveFunction regular_solution(cplx k, const RadiusProfile& profile);
WaveFunction sine_solution(cplx k, const RadiusProfile& profile);
WaveFunction jost_solution(cplx k, const RadiusProfile& profile);
WaveFunction g_solution(cplx k, const RadiusProfile& profile,
                        const ImpedanceModel& model);

// psi phi' - psi' phi at grid index i.
cplx wronskian(const WaveFunction& psi, const WaveFunction& phi,
               Eigen::Index i);
// Same at every grid node.
Eigen::VectorXcd wronskian(const WaveFunction& psi, const WaveFunction& phi);

inline cplx wronskian(const State& psi, const State& phi) {
  return psi[0] * phi[1] - psi[1] * phi[0];
}

}  // namespace vtract
