#include "vtract/schrodinger.hpp"

#include <algorithm>
#include <cmath>

namespace vtract {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

void check_finite(const State& y, cplx k) {
  if (!std::isfinite(std::abs(y[0])) || !std::isfinite(std::abs(y[1]))) {
    throw Error(ErrorKind::numeric,
                "solution overflow at k = (" + std::to_string(k.real()) +
                    ", " + std::to_string(k.imag()) + ")");
  }
}

}  // namespace

bool anchored_at_glottis(SolutionKind kind) {
  return kind == SolutionKind::regular || kind == SolutionKind::sine;
}

SchrodingerSolver::SchrodingerSolver(RadiusProfile profile,
                                     SolverOptions options)
    : profile_(std::move(profile)), options_(options) {
  if (options_.grid_nodes < 2) {
    throw Error(ErrorKind::invalid_argument, "solver grid needs 2 nodes");
  }
  const int n = options_.grid_nodes;
  const double ell = profile_.ell();
  grid_ = Eigen::VectorXd::LinSpaced(n, 0.0, ell);
  q1_.resize(n - 1);
  q2_.resize(n - 1);
  const double h = ell / (n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const double x = grid_[i];
    q1_[i] = profile_.potential(x + h * (0.5 - kSqrt3 / 6.0));
    q2_[i] = profile_.potential(x + h * (0.5 + kSqrt3 / 6.0));
  }
}

// Fourth-order Magnus step: exp(Omega) with
//   Omega = [[d, h], [h (c1 + c2)/2, -d]],  c_i = q_i - k^2,
//   d = sqrt(3) h^2 (q1 - q2) / 12.
// Omega is traceless, so exp(Omega) = cosh(s) I + sinh(s)/s Omega.
Eigen::Matrix2cd SchrodingerSolver::magnus_step(cplx k, double h, double q1,
                                                double q2, bool inverse) const {
  const cplx k2 = k * k;
  const cplx c = 0.5 * h * ((q1 - k2) + (q2 - k2));
  const double d = kSqrt3 * h * h * (q1 - q2) / 12.0;
  const cplx s2 = d * d + h * c;
  const cplx s = std::sqrt(s2);
  const cplx ch = std::cosh(s);
  const cplx sh = std::abs(s) < 1e-4
                      ? 1.0 + s2 / 6.0 + s2 * s2 / 120.0
                      : std::sinh(s) / s;
  const double sign = inverse ? -1.0 : 1.0;
  Eigen::Matrix2cd m;
  m << ch + sign * sh * d, sign * sh * h, sign * sh * c, ch - sign * sh * d;
  return m;
}

Eigen::Matrix2cd SchrodingerSolver::transfer(cplx k) const {
  if (options_.integrator == Integrator::dopri5) {
    Eigen::Matrix2cd m;
    m.col(0) = dopri5(k, State(1.0, 0.0), 0.0, profile_.ell());
    m.col(1) = dopri5(k, State(0.0, 1.0), 0.0, profile_.ell());
    return m;
  }
  if (profile_.potential_vanishes()) {
    return magnus_step(k, profile_.ell(), 0.0, 0.0, false);
  }
  const double h = profile_.ell() / (options_.grid_nodes - 1);
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  for (Eigen::Index i = 0; i < q1_.size(); ++i) {
    m = magnus_step(k, h, q1_[i], q2_[i], false) * m;
  }
  check_finite(m.col(0), k);
  check_finite(m.col(1), k);
  return m;
}

State SchrodingerSolver::propagate(cplx k, const State& y, double from,
                                   double to) const {
  if (from == to) return y;
  if (options_.integrator == Integrator::dopri5) return dopri5(k, y, from, to);
  const double lo = std::min(from, to);
  const double hi = std::max(from, to);
  const bool backward = to < from;
  if (profile_.potential_vanishes()) {
    State out = magnus_step(k, hi - lo, 0.0, 0.0, backward) * y;
    check_finite(out, k);
    return out;
  }
  const double cell = profile_.ell() / (options_.grid_nodes - 1);
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / cell - 1e-9)));
  const double h = (hi - lo) / n;
  State out = y;
  for (int j = 0; j < n; ++j) {
    // Cells are visited in the direction of travel.
    const int cell_index = backward ? n - 1 - j : j;
    const double x = lo + cell_index * h;
    const double q1 = profile_.potential(x + h * (0.5 - kSqrt3 / 6.0));
    const double q2 = profile_.potential(x + h * (0.5 + kSqrt3 / 6.0));
    out = magnus_step(k, h, q1, q2, backward) * out;
  }
  check_finite(out, k);
  return out;
}

State SchrodingerSolver::anchor(SolutionKind kind, cplx k,
                                const ImpedanceModel* model) const {
  const auto& e = profile_.endpoints();
  switch (kind) {
    case SolutionKind::regular: return {1.0, e.r0_prime / e.r0};
    case SolutionKind::sine: return {0.0, 1.0};
    case SolutionKind::jost: {
      const cplx ph = std::exp(cplx(0.0, 1.0) * k * profile_.ell());
      return {ph, cplx(0.0, 1.0) * k * ph};
    }
    case SolutionKind::impedance: {
      if (model == nullptr) {
        throw Error(ErrorKind::invalid_argument,
                    "impedance solution needs an impedance model");
      }
      const cplx z = z_eval(k, *model);
      return {z, (e.r_ell_prime / e.r_ell) * z - cplx(0.0, 1.0) * k};
    }
  }
  return {};
}

State SchrodingerSolver::at(SolutionKind kind, cplx k, double x,
                            const ImpedanceModel* model) const {
  const double start = anchored_at_glottis(kind) ? 0.0 : profile_.ell();
  return propagate(k, anchor(kind, k, model), start, x);
}

WaveFunction SchrodingerSolver::solve(SolutionKind kind, cplx k,
                                      const ImpedanceModel* model) const {
  const Eigen::Index n = grid_.size();
  WaveFunction wf;
  wf.k = k;
  wf.kind = kind;
  wf.x = grid_;
  wf.value.resize(n);
  wf.derivative.resize(n);
  const double h = profile_.ell() / (n - 1);
  const bool forward = anchored_at_glottis(kind);
  State y = anchor(kind, k, model);
  const Eigen::Index first = forward ? 0 : n - 1;
  wf.value[first] = y[0];
  wf.derivative[first] = y[1];
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const Eigen::Index cell = forward ? j : n - 2 - j;
    const Eigen::Index next = forward ? cell + 1 : cell;
    if (options_.integrator == Integrator::dopri5) {
      const Eigen::Index prev = forward ? cell : cell + 1;
      y = dopri5(k, y, grid_[prev], grid_[next]);
    } else {
      const double q1 = profile_.potential_vanishes() ? 0.0 : q1_[cell];
      const double q2 = profile_.potential_vanishes() ? 0.0 : q2_[cell];
      y = magnus_step(k, h, q1, q2, !forward) * y;
    }
    wf.value[next] = y[0];
    wf.derivative[next] = y[1];
  }
  check_finite(y, k);
  return wf;
}

// Dormand-Prince 5(4) with standard step control.
State SchrodingerSolver::dopri5(cplx k, State y, double from,
                                double to) const {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  const cplx k2 = k * k;
  auto rhs = [&](double x, const State& s) {
    return State(s[1], (profile_.potential(x) - k2) * s[0]);
  };
  const double span = to - from;
  const double dir = span > 0 ? 1.0 : -1.0;
  double h = dir * std::min(std::abs(span), 0.05 / (1.0 + std::abs(k)));
  double x = from;
  State f1 = rhs(x, y);
  while (dir * (to - x) > 0.0) {
    if (dir * (x + h - to) > 0.0) h = to - x;
    const State f2 = rhs(x + c2 * h, y + h * a21 * f1);
    const State f3 = rhs(x + c3 * h, y + h * (a31 * f1 + a32 * f2));
    const State f4 = rhs(x + c4 * h, y + h * (a41 * f1 + a42 * f2 + a43 * f3));
    const State f5 = rhs(x + c5 * h, y + h * (a51 * f1 + a52 * f2 + a53 * f3 +
                                              a54 * f4));
    const State f6 = rhs(x + h, y + h * (a61 * f1 + a62 * f2 + a63 * f3 +
                                         a64 * f4 + a65 * f5));
    const State y5 =
        y + h * (b1 * f1 + b3 * f3 + b4 * f4 + b5 * f5 + b6 * f6);
    const State f7 = rhs(x + h, y5);
    const State err = h * (e1 * f1 + e3 * f3 + e4 * f4 + e5 * f5 + e6 * f6 +
                           e7 * f7);
    double norm = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double sc =
          options_.atol +
          options_.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      norm = std::max(norm, std::abs(err[i]) / sc);
    }
    if (norm <= 1.0) {
      x += h;
      y = y5;
      f1 = f7;
    }
    const double factor =
        norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
    h *= factor;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(span))) {
      throw Error(ErrorKind::numeric, "integrator step-size underflow");
    }
  }
  check_finite(y, k);
  return y;
}

WaveFunction regular_solution(cplx k, const RadiusProfile& profile) {
  return SchrodingerSolver(profile).solve(SolutionKind::regular, k);
}

WaveFunction sine_solution(cplx k, const RadiusProfile& profile) {
  return SchrodingerSolver(profile).solve(SolutionKind::sine, k);
}

WaveFunction jost_solution(cplx k, const RadiusProfile& profile) {
  return SchrodingerSolver(profile).solve(SolutionKind::jost, k);
}

WaveFunction g_solution(cplx k, const RadiusProfile& profile,
                        const ImpedanceModel& model) {
  return SchrodingerSolver(profile).solve(SolutionKind::impedance, k, &model);
}

cplx wronskian(const WaveFunction& psi, const WaveFunction& phi,
               Eigen::Index i) {
  // Both must solve the same equation, which depends on k only through k^2.
  if (psi.k * psi.k != phi.k * phi.k) {
    throw Error(ErrorKind::invalid_argument, "wronskian: mismatched k");
  }
  if (psi.x.size() != phi.x.size() || i < 0 || i >= psi.x.size()) {
    throw Error(ErrorKind::invalid_argument, "wronskian: mismatched grids");
  }
  return psi.value[i] * phi.derivative[i] - psi.derivative[i] * phi.value[i];
}

Eigen::VectorXcd wronskian(const WaveFunction& psi, const WaveFunction& phi) {
  Eigen::VectorXcd w(psi.x.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = wronskian(psi, phi, i);
  return w;
}

}  // namespace vtract
