#include "vtract/spline.hpp"

#include <algorithm>

#include "vtract/error.hpp"

namespace vtract {

CubicSpline::CubicSpline(Eigen::VectorXd x, Eigen::VectorXd y,
                         std::optional<double> slope_left,
                         std::optional<double> slope_right)
    : x_(std::move(x)), y_(std::move(y)) {
  const Eigen::Index n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw Error(ErrorKind::invalid_argument,
                "spline needs at least two matching nodes");
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw Error(ErrorKind::invalid_argument,
                  "spline abscissa must be strictly increasing");
    }
  }

  // Tridiagonal system for the knot second derivatives (Thomas algorithm).
  Eigen::VectorXd sub(n), diag(n), sup(n), rhs(n);
  sub.setZero();
  sup.setZero();
  if (slope_left) {
    const double h = x_[1] - x_[0];
    diag[0] = h / 3.0;
    sup[0] = h / 6.0;
    rhs[0] = (y_[1] - y_[0]) / h - *slope_left;
  } else {
    diag[0] = 1.0;
    rhs[0] = 0.0;
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    sub[i] = h0 / 6.0;
    diag[i] = (h0 + h1) / 3.0;
    sup[i] = h1 / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
  }
  if (slope_right) {
    const double h = x_[n - 1] - x_[n - 2];
    sub[n - 1] = h / 6.0;
    diag[n - 1] = h / 3.0;
    rhs[n - 1] = *slope_right - (y_[n - 1] - y_[n - 2]) / h;
  } else {
    diag[n - 1] = 1.0;
    rhs[n - 1] = 0.0;
  }

  for (Eigen::Index i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_.resize(n);
  m_[n - 1] = rhs[n - 1] / diag[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
  }
}

Eigen::Index CubicSpline::interval(double t) const {
  const auto* begin = x_.data();
  const auto* end = x_.data() + x_.size();
  auto it = std::upper_bound(begin, end, t);
  Eigen::Index i = static_cast<Eigen::Index>(it - begin) - 1;
  return std::clamp<Eigen::Index>(i, 0, x_.size() - 2);
}

double CubicSpline::value(double t) const {
  const Eigen::Index i = interval(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
  const Eigen::Index i = interval(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h /
             6.0;
}

double CubicSpline::second_derivative(double t) const {
  const Eigen::Index i = interval(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

}  // namespace vtract
