#include "vtract/profile.hpp"

#include <cmath>

#include "vtract/error.hpp"
#include "vtract/quadrature.hpp"

namespace vtract {

namespace {

constexpr int kPositivityGrid = 4096;

void require_length(double ell) {
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw Error(ErrorKind::invalid_argument,
                "tube length must be positive and finite");
  }
}

void require_radius(double r0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) {
    throw Error(ErrorKind::invalid_argument,
                "glottal radius r0 must be positive and finite");
  }
}

// Second-order one-sided derivative from three (possibly unequal) nodes;
// h1, h2 are signed offsets of the neighbours from the anchor.
double one_sided(double f0, double f1, double f2, double h1, double h2) {
  return -(h1 + h2) / (h1 * h2) * f0 + h2 / (h1 * (h2 - h1)) * f1 -
         h1 / (h2 * (h2 - h1)) * f2;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::uniform: return "uniform";
    case Family::linear: return "linear";
    case Family::quadratic: return "quadratic";
    case Family::sampled: return "sampled";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "uniform") return Family::uniform;
  if (name == "linear") return Family::linear;
  if (name == "quadratic") return Family::quadratic;
  if (name == "sampled") return Family::sampled;
  throw Error(ErrorKind::parse, "unknown profile family '" + name + "'");
}

RadiusProfile RadiusProfile::uniform(double r0, double ell) {
  require_length(ell);
  require_radius(r0);
  RadiusProfile p;
  p.family_ = Family::uniform;
  p.ell_ = ell;
  p.ends_ = {r0, 0.0, r0, 0.0};
  p.finish();
  return p;
}

RadiusProfile RadiusProfile::linear(double r0, double r0_prime, double ell) {
  require_length(ell);
  require_radius(r0);
  const double r_ell = r0 + ell * r0_prime;
  if (!(r_ell > 0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "linear profile reaches a non-positive radius at x = ell");
  }
  RadiusProfile p;
  p.family_ = Family::linear;
  p.ell_ = ell;
  p.ends_ = {r0, r0_prime, r_ell, r0_prime};
  p.finish();
  return p;
}

RadiusProfile RadiusProfile::quadratic(double r0, double r0_prime, double ell) {
  require_length(ell);
  require_radius(r0);
  const double b = std::sqrt(r0);
  const double a = r0_prime / (2.0 * b);
  if (!(a * ell + b > 0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "quadratic profile pinches to zero radius inside [0, ell]");
  }
  RadiusProfile p;
  p.family_ = Family::quadratic;
  p.ell_ = ell;
  p.a_ = a;
  p.b_ = b;
  const double root = a * ell + b;
  p.ends_ = {r0, r0_prime, root * root,
             r0_prime + ell * r0_prime * r0_prime / (2.0 * r0)};
  p.finish();
  return p;
}

RadiusProfile RadiusProfile::sampled(Eigen::VectorXd x, Eigen::VectorXd r) {
  const Eigen::Index n = x.size();
  if (n < 3 || r.size() != n) {
    throw Error(ErrorKind::invalid_argument,
                "sampled profile needs at least three (x, r) pairs");
  }
  if (x[0] != 0.0) {
    throw Error(ErrorKind::invalid_argument,
                "sampled profile must start at x = 0");
  }
  require_length(x[n - 1]);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(r[i] > 0.0) || !std::isfinite(r[i])) {
      throw Error(ErrorKind::invalid_argument,
                  "sampled radius must be positive at every node");
    }
  }
  RadiusProfile p;
  p.family_ = Family::sampled;
  p.ell_ = x[n - 1];
  const double s0 =
      one_sided(r[0], r[1], r[2], x[1] - x[0], x[2] - x[0]);
  const double sl = one_sided(r[n - 1], r[n - 2], r[n - 3],
                              x[n - 2] - x[n - 1], x[n - 3] - x[n - 1]);
  p.ends_ = {r[0], s0, r[n - 1], sl};
  p.spline_ = std::make_shared<const CubicSpline>(x, r, s0, sl);
  p.sx_ = std::move(x);
  p.sr_ = std::move(r);
  p.finish();
  return p;
}

void RadiusProfile::finish() {
  for (int i = 0; i <= kPositivityGrid; ++i) {
    const double x = ell_ * i / kPositivityGrid;
    if (!(radius(x) > 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "radius is not positive at x = " + std::to_string(x));
    }
  }
  switch (family_) {
    case Family::uniform:
    case Family::linear:
      q_integral_ = 0.0;
      break;
    case Family::quadratic:
      q_integral_ = 2.0 * a_ * (1.0 / b_ - 1.0 / (a_ * ell_ + b_));
      break;
    case Family::sampled: {
      if (sx_.size() < kMinSampledNodes) break;
      const auto& rule = gauss_legendre(8);
      double sum = 0.0;
      for (Eigen::Index j = 0; j + 1 < sx_.size(); ++j) {
        const double lo = sx_[j], hi = sx_[j + 1];
        for (int i = 0; i < 8; ++i) {
          const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[i];
          sum += 0.5 * (hi - lo) * rule.weights[i] * potential(t);
        }
      }
      q_integral_ = sum;
      break;
    }
  }
}

double RadiusProfile::radius(double x) const {
  switch (family_) {
    case Family::uniform: return ends_.r0;
    case Family::linear: return ends_.r0 + ends_.r0_prime * x;
    case Family::quadratic: {
      const double s = a_ * x + b_;
      return s * s;
    }
    case Family::sampled: return spline_->value(x);
  }
  return 0.0;
}

double RadiusProfile::slope(double x) const {
  switch (family_) {
    case Family::uniform: return 0.0;
    case Family::linear: return ends_.r0_prime;
    case Family::quadratic: return 2.0 * a_ * (a_ * x + b_);
    case Family::sampled: return spline_->derivative(x);
  }
  return 0.0;
}

double RadiusProfile::curvature(double x) const {
  switch (family_) {
    case Family::uniform:
    case Family::linear: return 0.0;
    case Family::quadratic: return 2.0 * a_ * a_;
    case Family::sampled: return spline_->second_derivative(x);
  }
  return 0.0;
}

double RadiusProfile::potential(double x) const {
  if (x < 0.0 || x > ell_) return 0.0;
  switch (family_) {
    case Family::uniform:
    case Family::linear: return 0.0;
    case Family::quadratic: {
      const double s = a_ * x + b_;
      return 2.0 * a_ * a_ / (s * s);
    }
    case Family::sampled:
      if (sx_.size() < kMinSampledNodes) {
        throw Error(ErrorKind::invalid_argument,
                    "sampled profile too coarse to estimate r''");
      }
      return spline_->second_derivative(x) / spline_->value(x);
  }
  return 0.0;
}

RadiusProfile make_profile(Family family, const ProfileParams& params,
                           double ell) {
  switch (family) {
    case Family::uniform: return RadiusProfile::uniform(params.r0, ell);
    case Family::linear:
      return RadiusProfile::linear(params.r0, params.r0_prime, ell);
    case Family::quadratic:
      return RadiusProfile::quadratic(params.r0, params.r0_prime, ell);
    case Family::sampled: {
      auto p = RadiusProfile::sampled(params.x, params.r);
      if (std::abs(p.ell() - ell) > 1e-12 * ell) {
        throw Error(ErrorKind::invalid_argument,
                    "sampled abscissa does not end at ell");
      }
      return p;
    }
  }
  throw Error(ErrorKind::invalid_argument, "unknown profile family");
}

Potential potential_of(const RadiusProfile& profile, int grid_nodes) {
  if (profile.family() == Family::sampled &&
      profile.sample_x().size() < kMinSampledNodes) {
    throw Error(ErrorKind::invalid_argument,
                "sampled profile has fewer than " +
                    std::to_string(kMinSampledNodes) + " nodes");
  }
  if (grid_nodes < 2) {
    throw Error(ErrorKind::invalid_argument, "potential grid needs 2 nodes");
  }
  Potential pot;
  pot.x = Eigen::VectorXd::LinSpaced(grid_nodes, 0.0, profile.ell());
  pot.q.resize(grid_nodes);
  for (int i = 0; i < grid_nodes; ++i) pot.q[i] = profile.potential(pot.x[i]);
  pot.closed_form = profile.family() != Family::sampled;
  return pot;
}

}  // namespace vtract
