#pragma once

#include <optional>

#include <Eigen/Core>

namespace vtract {

/// Cubic interpolating spline on a strictly increasing abscissa.
///
/// End conditions are clamped when a slope is supplied for that end and
/// natural (zero second derivative) otherwise.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(Eigen::VectorXd x, Eigen::VectorXd y,
              std::optional<double> slope_left = std::nullopt,
              std::optional<double> slope_right = std::nullopt);

  double operator()(double t) const { return value(t); }
  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  const Eigen::VectorXd& knots() const { return x_; }
  const Eigen::VectorXd& values() const { return y_; }
  bool empty() const { return x_.size() == 0; }

 private:
  Eigen::Index interval(double t) const;

  Eigen::VectorXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd m_;  // second derivatives at the knots
};

}  // namespace vtract
