#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>

#include "vtract/spline.hpp"

namespace vtract {

enum class Family { uniform, linear, quadratic, sampled };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

struct EndpointData {
  double r0 = 0.0;
  double r0_prime = 0.0;
  double r_ell = 0.0;
  double r_ell_prime = 0.0;
};

struct ProfileParams {
  double r0 = 1.0;
  double r0_prime = 0.0;
  Eigen::VectorXd x;  // sampled family only
  Eigen::VectorXd r;
};

inline constexpr int kDefaultGridNodes = 1024;
inline constexpr int kMinSampledNodes = 8;

/// Tube radius r(x) on [0, ell]. Immutable after construction.
///
/// The closed-form families are
///   uniform    r = r0
///   linear     r = r0 + r0' x
///   quadratic  r = (a x + b)^2,  a = r0' / (2 sqrt(r0)),  b = sqrt(r0)
/// and `sampled` interpolates tabulated radii with a clamped cubic spline.
class RadiusProfile {
 public:
  static RadiusProfile uniform(double r0, double ell);
  static RadiusProfile linear(double r0, double r0_prime, double ell);
  static RadiusProfile quadratic(double r0, double r0_prime, double ell);
  static RadiusProfile sampled(Eigen::VectorXd x, Eigen::VectorXd r);

  Family family() const { return family_; }
  double ell() const { return ell_; }
  const EndpointData& endpoints() const { return ends_; }

  double radius(double x) const;
  double slope(double x) const;
  double curvature(double x) const;

  // q = r'' / r, taken as zero outside [0, ell].
  double potential(double x) const;
  bool potential_vanishes() const {
    return family_ == Family::uniform || family_ == Family::linear;
  }
  double potential_integral() const { return q_integral_; }
  // r0'/r0 + (1/2) \int_0^ell q
  double gamma() const { return ends_.r0_prime / ends_.r0 + 0.5 * q_integral_; }

  // Quadratic coefficients (a, b); zero for other families.
  double quad_a() const { return a_; }
  double quad_b() const { return b_; }

  // Parameters as given to the factory (r0, r0') and the sample table.
  double r0_param() const { return ends_.r0; }
  double r0p_param() const { return ends_.r0_prime; }
  const Eigen::VectorXd& sample_x() const { return sx_; }
  const Eigen::VectorXd& sample_r() const { return sr_; }

 private:
  RadiusProfile() = default;
  void finish();

  Family family_ = Family::uniform;
  double ell_ = 0.0;
  EndpointData ends_;
  double a_ = 0.0;
  double b_ = 0.0;
  double q_integral_ = 0.0;
  Eigen::VectorXd sx_;
  Eigen::VectorXd sr_;
  std::shared_ptr<const CubicSpline> spline_;
};

RadiusProfile make_profile(Family family, const ProfileParams& params,
                           double ell);

inline EndpointData endpoint_data(const RadiusProfile& p) {
  return p.endpoints();
}

struct Potential {
  Eigen::VectorXd x;
  Eigen::VectorXd q;
  bool closed_form = false;
};

Potential potential_of(const RadiusProfile& profile,
                       int grid_nodes = kDefaultGridNodes);

}  // namespace vtract
