#include "vtract/gelfand_levitan.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "vtract/quadrature.hpp"
#include "vtract/spline.hpp"

namespace vtract {

namespace {

constexpr double kPi = std::numbers::pi;

double minus_i_F(const JostHandle& F, double kappa) {
  return (cplx(0.0, -1.0) * F(cplx(0.0, kappa))).real();
}

double default_kappa_max(double ell) { return std::max(10.0 / ell, 2.0); }

}  // namespace

int count_imaginary_sign_changes(const JostHandle& F, double kappa_max,
                                 int scan_points) {
  if (!(kappa_max > 0.0) || scan_points < 2) {
    throw Error(ErrorKind::invalid_argument, "bad imaginary-axis scan");
  }
  int changes = 0;
  double prev = minus_i_F(F, kappa_max / scan_points);
  for (int i = 2; i <= scan_points; ++i) {
    const double v = minus_i_F(F, kappa_max * i / scan_points);
    if ((prev < 0.0) != (v < 0.0)) ++changes;
    prev = v;
  }
  return changes;
}

std::optional<BoundState> bound_state(const JostHandle& F, double r_ell_prime,
                                      double ell, BoundStateOptions options) {
  if (r_ell_prime >= 0.0) return std::nullopt;
  const double kmax =
      options.kappa_max > 0.0 ? options.kappa_max : default_kappa_max(ell);

  // -iF(i kappa) starts at r_ell'/r0 < 0 and grows like kappa; bracket the
  // first sign change on a scan, then bisect.
  const int n = std::max(options.scan_points, 2);
  double lo = 0.0;
  double f_lo = minus_i_F(F, 0.0);
  double hi = -1.0;
  for (int i = 1; i <= n; ++i) {
    const double kap = kmax * i / n;
    const double v = minus_i_F(F, kap);
    if ((v < 0.0) != (f_lo < 0.0)) {
      hi = kap;
      break;
    }
    lo = kap;
    f_lo = v;
  }
  if (hi < 0.0) {
    throw Error(ErrorKind::pipeline,
                "no bound state found on (0, " + std::to_string(kmax) +
                    "] although r_ell' < 0");
  }
  for (int it = 0; it < 200 && hi - lo > options.tolerance * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = minus_i_F(F, mid);
    if ((v < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = v;
    } else {
      hi = mid;
    }
  }
  const double kappa1 = 0.5 * (lo + hi);

  // dF/dk along the imaginary direction.
  const double h = 1e-4 * std::max(kappa1, 1e-3);
  const cplx dF = (F(cplx(0.0, kappa1 + h)) - F(cplx(0.0, kappa1 - h))) /
                  cplx(0.0, 2.0 * h);
  const cplx g1sq = cplx(0.0, -4.0) * kappa1 * kappa1 /
                    (F(cplx(0.0, -kappa1)) * dF);
  if (!(g1sq.real() > 0.0)) {
    throw Error(ErrorKind::pipeline, "non-positive bound-state norming constant");
  }
  return BoundState{kappa1, g1sq.real()};
}

GLKernel::GLKernel(const std::function<cplx(double)>& F, double ell,
                   std::optional<BoundState> bound, KernelOptions options)
    : ell_(ell), window_fraction_(options.window_fraction), bound_(bound) {
  if (!(ell > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "kernel needs ell > 0");
  }
  k_max_ = options.k_max > 0.0 ? options.k_max : 60.0 * kPi / ell;
  if (!(window_fraction_ >= 0.0 && window_fraction_ < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "window fraction must be in [0,1)");
  }

  // Panels: geometric toward k = 0 (resolves the Lorentzian dip when F(0) is
  // small), then uniform up to k_max.
  const QuadratureRule& rule = gauss_legendre(8);
  const double first = std::min(options.panel_width, k_max_);
  std::vector<std::pair<double, double>> panels;
  double a = first * std::ldexp(1.0, -options.graded_levels);
  panels.emplace_back(0.0, a);
  while (a < first) {
    panels.emplace_back(a, 2.0 * a);
    a *= 2.0;
  }
  const int uniform =
      std::max(1, static_cast<int>(std::ceil((k_max_ - first) /
                                             options.panel_width)));
  const double w = (k_max_ - first) / uniform;
  for (int p = 0; p < uniform && k_max_ > first; ++p) {
    panels.emplace_back(first + p * w, first + (p + 1) * w);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(panels.size()) * 8;
  nodes_.resize(n);
  weights_.resize(n);
  values_.resize(n);
  const double taper = k_max_ * (1.0 - window_fraction_);
  Eigen::Index idx = 0;
  for (const auto& [lo, hi] : panels) {
    const double half = 0.5 * (hi - lo);
    for (int j = 0; j < 8; ++j, ++idx) {
      const double k = lo + half * (rule.nodes[j] + 1.0);
      double win = 1.0;
      if (k > taper && window_fraction_ > 0.0) {
        win = 0.5 * (1.0 + std::cos(kPi * (k - taper) / (k_max_ - taper)));
      }
      nodes_[idx] = k;
      weights_[idx] = half * rule.weights[j] * win / kPi;
      const double f2 = std::norm(F(k));
      if (!(f2 > 0.0) || !std::isfinite(f2)) {
        throw Error(ErrorKind::numeric,
                    "Jost function vanishes or is not finite at k = " +
                        std::to_string(k));
      }
      values_[idx] = k * k / f2 - 1.0;
    }
  }
}

double GLKernel::phi(double t) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < nodes_.size(); ++i) {
    s += weights_[i] * values_[i] * std::cos(nodes_[i] * t);
  }
  return s;
}

double GLKernel::operator()(double x, double y) const {
  double g = phi(x - y) + phi(x + y);
  if (bound_) {
    g += bound_->g1_squared * std::cosh(bound_->kappa1 * x) *
         std::cosh(bound_->kappa1 * y);
  }
  return g;
}

double gl_kernel(const GLKernel& kernel, double x, double y) {
  return kernel(x, y);
}

GLState gl_solve(const GLKernel& kernel, int grid_n) {
  if (grid_n < 64) {
    throw Error(ErrorKind::invalid_argument, "GL grid needs at least 64 nodes");
  }
  const Eigen::Index n = grid_n;
  const double h = kernel.ell() / (n - 1);

  // Phi on the lattice t = m h covers every x - y and x + y.
  Eigen::VectorXd phi_tab(2 * n - 1);
  for (Eigen::Index m = 0; m < phi_tab.size(); ++m) {
    phi_tab[m] = kernel.phi(static_cast<double>(m) * h);
  }
  Eigen::VectorXd cosh_tab = Eigen::VectorXd::Zero(n);
  double g1sq = 0.0;
  if (kernel.bound()) {
    g1sq = kernel.bound()->g1_squared;
    for (Eigen::Index i = 0; i < n; ++i) {
      cosh_tab[i] = std::cosh(kernel.bound()->kappa1 * i * h);
    }
  }
  auto Gk = [&](Eigen::Index i, Eigen::Index j) {
    return phi_tab[std::abs(i - j)] + phi_tab[i + j] +
           g1sq * cosh_tab[i] * cosh_tab[j];
  };

  GLState st;
  st.x = Eigen::VectorXd::LinSpaced(n, 0.0, kernel.ell());
  st.A = Eigen::MatrixXd::Zero(n, n);
  st.A(0, 0) = -Gk(0, 0);

  for (Eigen::Index i = 1; i < n; ++i) {
    const Eigen::Index m = i + 1;
    Eigen::MatrixXd M(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index s = 0; s < m; ++s) {
      const double w = (s == 0 || s == i) ? 0.5 * h : h;
      for (Eigen::Index j = 0; j < m; ++j) {
        M(j, s) = w * Gk(s, j);
      }
    }
    M.diagonal().array() += 1.0;
    for (Eigen::Index j = 0; j < m; ++j) rhs[j] = -Gk(i, j);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const double rc = lu.rcond();
    if (rc < st.min_rcond) {
      st.min_rcond = rc;
      st.worst_x = st.x[i];
    }
    if (!(rc > 1e-14)) {
      throw Error(ErrorKind::numeric,
                  "Gel'fand-Levitan system singular at x = " +
                      std::to_string(st.x[i]));
    }
    st.A.row(i).head(m) = lu.solve(rhs).transpose();
  }
  return st;
}

RecoveredProfile recover_profile(const GLState& state, double r0) {
  if (!(r0 > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "recovery needs r0 > 0");
  }
  const Eigen::Index n = state.x.size();
  const double h = state.x[1] - state.x[0];

  Eigen::VectorXd r(n);
  r[0] = r0;
  for (Eigen::Index i = 1; i < n; ++i) {
    double s = 0.5 * (state.A(i, 0) + state.A(i, i));
    for (Eigen::Index j = 1; j < i; ++j) s += state.A(i, j);
    r[i] = r0 * (1.0 + h * s);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(r[i] > 0.0) || !std::isfinite(r[i])) {
      throw Error(ErrorKind::pipeline,
                  "recovered radius is not positive at x = " +
                      std::to_string(state.x[i]));
    }
  }

  const CubicSpline diag(state.x, state.A.diagonal());
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q[i] = 2.0 * diag.derivative(state.x[i]);
  }
  RecoveredProfile out{RadiusProfile::sampled(state.x, r), state.x, r, q,
                       state.A(0, 0)};
  return out;
}

}  // namespace vtract
