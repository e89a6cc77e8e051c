#include "vtract/outer.hpp"

#include <cmath>
#include <numbers>

namespace vtract {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

}  // namespace

cplx blaschke_factor(cplx k, const std::vector<cplx>& fourth_quadrant) {
  cplx r = 1.0;
  for (const cplx& kj : fourth_quadrant) {
    r *= (k - kj) * (k + std::conj(kj)) / ((k + kj) * (k - std::conj(kj)));
  }
  return r;
}

OuterReconstruction::OuterReconstruction(const Eigen::VectorXd& k,
                                         const Eigen::VectorXd& abs_G,
                                         std::vector<cplx> fourth_quadrant,
                                         double ell)
    : poles_(std::move(fourth_quadrant)), ell_(ell) {
  const Eigen::Index n = k.size();
  if (n < 8 || abs_G.size() != n) {
    throw Error(ErrorKind::invalid_argument,
                "outer reconstruction needs at least 8 matching samples");
  }
  if (!(k[0] > 0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "magnitude grid must start above k = 0");
  }
  for (const cplx& p : poles_) {
    if (!(p.real() > 0.0 && p.imag() < 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "pole list must lie in the open fourth quadrant");
    }
  }

  // ln|G/k| is even and flat at 0 (|G/k| -> r_ell/r0), so the gap below the
  // first sample is closed with its value there.
  t_.resize(n + 1);
  L_.resize(n + 1);
  t_[0] = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(abs_G[i] > 0.0) || !std::isfinite(abs_G[i])) {
      throw Error(ErrorKind::invalid_argument,
                  "|G| must be positive and finite on the grid");
    }
    t_[i + 1] = k[i];
    L_[i + 1] = std::log(abs_G[i] / k[i]);
  }
  L_[0] = L_[1];
  L_spline_ = CubicSpline(t_, L_, 0.0);

  w_.resize(n + 1);
  w_.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = t_[i + 1] - t_[i];
    w_[i] += 0.5 * h;
    w_[i + 1] += 0.5 * h;
  }
  const double top = 0.9 * t_[n];
  int m = 0;
  for (Eigen::Index i = 0; i <= n; ++i) {
    if (t_[i] >= top) {
      tail_mean_ += L_[i];
      ++m;
    }
  }
  tail_mean_ /= m;
  for (Eigen::Index i = 0; i <= n; ++i) {
    if (t_[i] >= top) {
      tail_level_ = std::max(tail_level_, std::abs(L_[i] - tail_mean_));
    }
  }
}

cplx OuterReconstruction::exponent(cplx k) const {
  if (k.imag() > 0.0) {
    throw Error(ErrorKind::invalid_argument,
                "outer reconstruction is valid on Im k <= 0 only");
  }
  const double T = k_max();
  const double re = k.real();
  // Subtract the value under the (near) singular point; the subtracted piece
  // integrates in closed form on the continuous branch from -1.
  const double Lk = (re >= 0.0 && re <= T) ? L_spline_(re) : tail_mean_;
  const double dLk = (re >= 0.0 && re <= T) ? L_spline_.derivative(re) : 0.0;
  cplx s = 0.0;
  for (Eigen::Index j = 0; j < t_.size(); ++j) {
    const cplx d = t_[j] - k;
    if (std::abs(d) < 1e-12 * (1.0 + T)) {
      s += w_[j] * dLk;
    } else {
      s += w_[j] * (L_[j] - Lk) * 2.0 * k / ((t_[j] + k) * d);
    }
  }
  s += (Lk - tail_mean_) * std::log((T - k) / (T + k)) - kI * kPi * Lk;
  return kI / kPi * s;
}

cplx OuterReconstruction::exponent_on_grid(Eigen::Index i) const {
  const double T = k_max();
  const double k = t_[i];
  const double Lk = L_[i];
  double s = w_[i] * L_spline_.derivative(k);
  for (Eigen::Index j = 0; j < t_.size(); ++j) {
    if (j == i) continue;
    s += w_[j] * (L_[j] - Lk) * 2.0 * k / (t_[j] * t_[j] - k * k);
  }
  cplx total = s;
  if (T > k) total += (Lk - tail_mean_) * std::log((T - k) / (T + k));
  total -= kI * kPi * Lk;
  return kI / kPi * total;
}

cplx OuterReconstruction::eval(cplx k) const {
  if (k == cplx(0.0)) return 0.0;
  return -kI * k * std::exp(kI * k * ell_) * blaschke_factor(k, poles_) *
         std::exp(exponent(k));
}

Eigen::VectorXcd OuterReconstruction::on_grid() const {
  const Eigen::Index n = t_.size() - 1;
  Eigen::VectorXcd g(n);
  for (Eigen::Index i = 1; i <= n; ++i) {
    const double k = t_[i];
    g[i - 1] = -kI * k * std::exp(kI * k * ell_) *
               blaschke_factor(k, poles_) * std::exp(exponent_on_grid(i));
  }
  return g;
}

double OuterReconstruction::tail_bound(double k) const {
  const double T = k_max();
  if (k >= T) return std::numeric_limits<double>::infinity();
  return tail_level_ / kPi * std::log((T + k) / (T - k));
}

cplx reconstruct_G_lower(const OuterReconstruction& outer, cplx k) {
  return outer.eval(k);
}

}  // namespace vtract
