#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "vtract/error.hpp"
#include "vtract/spline.hpp"

namespace vtract {

// R(k) = prod (k - k_j)(k + k_j^*) / ((k + k_j)(k - k_j^*)) over the
// fourth-quadrant zeros k_j; unimodular on the real axis.
cplx blaschke_factor(cplx k, const std::vector<cplx>& fourth_quadrant);

/// G on the closed lower half-plane from |G| on the real axis:
///   G(k) = -ik e^{ik ell} R(k) exp((i/pi) \int ln|G(y)/y| dy / (y - k + i0)).
/// The integral runs over the sampled range; beyond it ln|G/y| is held at
/// its mean over the top tenth of the range (0 for exact G, ln r0 for r0 G)
/// and the deviation from that is bounded by `tail_bound(k)`.
class OuterReconstruction {
 public:
  // `abs_G` sampled on a strictly increasing grid in (0, k_max].
  OuterReconstruction(const Eigen::VectorXd& k, const Eigen::VectorXd& abs_G,
                      std::vector<cplx> fourth_quadrant, double ell);

  cplx operator()(cplx k) const { return eval(k); }
  // Im k <= 0.
  cplx eval(cplx k) const;
  // G on the sample grid itself (principal value by subtraction).
  Eigen::VectorXcd on_grid() const;

  // Bound on the modulus of the neglected part of the exponent at real k.
  double tail_bound(double k) const;

  double tail_mean() const { return tail_mean_; }
  double ell() const { return ell_; }
  double k_max() const { return t_[t_.size() - 1]; }
  const Eigen::VectorXd& grid() const { return t_; }

 private:
  cplx exponent(cplx k) const;           // (i/pi) times the Cauchy integral
  cplx exponent_on_grid(Eigen::Index i) const;

  Eigen::VectorXd t_;  // 0 followed by the sample grid
  Eigen::VectorXd L_;  // ln|G(t)/t|
  Eigen::VectorXd w_;  // trapezoid weights
  CubicSpline L_spline_;
  double tail_mean_ = 0.0;   // mean of L on the top tenth of the range
  double tail_level_ = 0.0;  // max |L - tail_mean_| there
  std::vector<cplx> poles_;
  double ell_;
};

cplx reconstruct_G_lower(const OuterReconstruction& outer, cplx k);

}  // namespace vtract
