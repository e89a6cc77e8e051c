#pragma once

#include <complex>
#include <functional>

#include <Eigen/Core>

namespace vtract {

struct QuadratureRule {
  Eigen::VectorXd nodes;    // on [-1, 1]
  Eigen::VectorXd weights;
};

// Gauss-Legendre rule with n points; cached per n, thread-safe.
const QuadratureRule& gauss_legendre(int n);

// Composite n-point Gauss-Legendre over `panels` equal panels of [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels = 16, int n = 16);

// Adaptive Gauss-Kronrod (7/15) to the requested absolute/relative tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol = 1e-13,
                          double rel_tol = 1e-13, int max_depth = 48);

}  // namespace vtract
