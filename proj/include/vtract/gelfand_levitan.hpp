#pragma once

#include <functional>
#include <optional>

#include <Eigen/Core>

#include "vtract/error.hpp"
#include "vtract/profile.hpp"

namespace vtract {

using JostHandle = std::function<cplx(cplx)>;

struct BoundState {
  double kappa1 = 0.0;
  double g1_squared = 0.0;
};

struct BoundStateOptions {
  double kappa_max = 0.0;  // 0 selects a default from ell
  int scan_points = 400;
  double tolerance = 1e-12;
};

// Zero of F on the positive imaginary axis and its norming constant
// g1^2 = -4 i kappa1^2 / (F(-i kappa1) F'(i kappa1)); absent when r_ell' >= 0.
std::optional<BoundState> bound_state(const JostHandle& F, double r_ell_prime,
                                      double ell,
                                      BoundStateOptions options = {});

// Sign changes of -i F(i kappa) on a uniform scan of (0, kappa_max].
int count_imaginary_sign_changes(const JostHandle& F, double kappa_max,
                                 int scan_points = 400);

struct KernelOptions {
  double k_max = 0.0;            // 0 selects 60 pi / ell
  double window_fraction = 0.1;  // raised-cosine taper on the last part
  double panel_width = 0.05;     // k-panels of 8-point Gauss-Legendre
  int graded_levels = 40;        // geometric refinement toward k = 0
};

/// G(x, y) = Phi(x - y) + Phi(x + y) + g1^2 cosh(kappa1 x) cosh(kappa1 y),
/// Phi(t) = (1/pi) \int_0^K w(k) (k^2/|F(k)|^2 - 1) cos(k t) dk,
/// with w the taper window.
class GLKernel {
 public:
  GLKernel(const std::function<cplx(double)>& F, double ell,
           std::optional<BoundState> bound = std::nullopt,
           KernelOptions options = {});

  double operator()(double x, double y) const;
  double phi(double t) const;

  double ell() const { return ell_; }
  double k_max() const { return k_max_; }
  double window_start() const { return k_max_ * (1.0 - window_fraction_); }
  const std::optional<BoundState>& bound() const { return bound_; }

  // Integrand samples, for diagnostics.
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& integrand() const { return values_; }

 private:
  double ell_;
  double k_max_;
  double window_fraction_;
  std::optional<BoundState> bound_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;  // quadrature weight times taper / pi
  Eigen::VectorXd values_;   // k^2/|F|^2 - 1
};

double gl_kernel(const GLKernel& kernel, double x, double y);

struct GLState {
  Eigen::VectorXd x;   // uniform grid on [0, ell]
  Eigen::MatrixXd A;   // A(i, j) for j <= i; zero above the diagonal
  double min_rcond = 1.0;
  double worst_x = 0.0;
};

// Nystrom (trapezoid) solution of
//   A(x,y) + G(x,y) + \int_0^x A(x,s) G(s,y) ds = 0,  0 <= y <= x.
GLState gl_solve(const GLKernel& kernel, int grid_n = 256);

struct RecoveredProfile {
  RadiusProfile profile;
  Eigen::VectorXd x;
  Eigen::VectorXd r;
  Eigen::VectorXd q;      // 2 d/dx A(x, x)
  double a00 = 0.0;       // A(0, 0), equal to r0'/r0
};

RecoveredProfile recover_profile(const GLState& state, double r0);

}  // namespace vtract
