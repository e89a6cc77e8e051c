#include "vtract/forward.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

#include "vtract/quadrature.hpp"

namespace vtract {

namespace {

constexpr cplx I(0.0, 1.0);

}  // namespace

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::G: return "G";
    case Quantity::F: return "F";
    case Quantity::P_lips: return "P_lips";
    case Quantity::P_lips_abs: return "P_lips_abs";
    case Quantity::phi_ell: return "phi_ell";
    case Quantity::phi_prime_ell: return "phi_prime_ell";
    case Quantity::z: return "z";
  }
  return "unknown";
}

ForwardModel::ForwardModel(RadiusProfile profile, PhysicalConstants constants,
                           SolverOptions options)
    : solver_(std::move(profile), options),
      impedance_(solver_.profile().endpoints().r_ell),
      constants_(constants) {
  constants_.validate();
  impedance_.validate();
}

ForwardModel::ForwardModel(RadiusProfile profile, ImpedanceModel impedance,
                           PhysicalConstants constants, SolverOptions options)
    : solver_(std::move(profile), options),
      impedance_(impedance),
      constants_(constants) {
  constants_.validate();
  impedance_.validate();
}

State ForwardModel::phi_ell(cplx k) const {
  const auto& e = profile().endpoints();
  return solver_.transfer(k) * State(1.0, e.r0_prime / e.r0);
}

cplx ForwardModel::G(cplx k) const {
  const auto& e = profile().endpoints();
  const State phi = phi_ell(k);
  const cplx z = z_eval(k, impedance_);
  return phi[0] * ((e.r_ell_prime / e.r_ell) * z - I * k) - phi[1] * z;
}

cplx ForwardModel::F(cplx k) const {
  const State phi = phi_ell(k);
  return -I * std::exp(I * k * profile().ell()) * (I * k * phi[0] - phi[1]);
}

cplx ForwardModel::g0(cplx k) const {
  return solver_.at(SolutionKind::impedance, k, 0.0, &impedance_)[0];
}

State ForwardModel::field(cplx k, double x) const {
  const auto& e = profile().endpoints();
  const Eigen::Matrix2cd m = solver_.transfer(k);
  const State phi_l = m * State(1.0, e.r0_prime / e.r0);
  const cplx z = z_eval(k, impedance_);
  const State g_l(z, (e.r_ell_prime / e.r_ell) * z - I * k);
  const cplx g = phi_l[0] * g_l[1] - phi_l[1] * g_l[0];
  if (std::abs(g) < kPoleThreshold * std::max(1.0, std::abs(k))) {
    throw PoleError(k, std::abs(g));
  }
  // g(k, 0) through the inverse of the unimodular transfer matrix.
  const cplx g_zero = m(1, 1) * g_l[0] - m(0, 1) * g_l[1];
  const cplx ratio = g_zero / g;
  const State phi_x =
      solver_.propagate(k, State(1.0, e.r0_prime / e.r0), 0.0, x);
  const State s_x = solver_.propagate(k, State(0.0, 1.0), 0.0, x);
  return ratio * phi_x + s_x;
}

cplx ForwardModel::pressure(cplx k, double x) const {
  const auto& e = profile().endpoints();
  const State psi = field(k, x);
  return -I * k * constants_.c * constants_.mu /
         (std::numbers::pi * e.r0 * profile().radius(x)) * psi[0];
}

cplx ForwardModel::pressure_derivative(cplx k, double x) const {
  const auto& e = profile().endpoints();
  const State psi = field(k, x);
  const double r = profile().radius(x);
  const double rp = profile().slope(x);
  return -I * k * constants_.c * constants_.mu / (std::numbers::pi * e.r0) *
         (psi[1] / r - rp * psi[0] / (r * r));
}

cplx ForwardModel::lip_pressure(cplx k) const {
  const auto& e = profile().endpoints();
  const cplx g = G(k);
  if (std::abs(g) < kPoleThreshold * std::max(1.0, std::abs(k))) {
    throw PoleError(k, std::abs(g));
  }
  return -I * k * constants_.c * constants_.mu /
         (std::numbers::pi * e.r0 * e.r_ell) * z_eval(k, impedance_) / g;
}

cplx ForwardModel::volume_velocity(cplx k, double x) const {
  if (k == cplx(0.0)) {
    throw Error(ErrorKind::invalid_argument, "volume velocity needs k != 0");
  }
  const State psi = field(k, x);
  return (profile().radius(x) * psi[1] - profile().slope(x) * psi[0]) /
         profile().endpoints().r0;
}

cplx ForwardModel::volume_velocity_derivative(cplx k, double x) const {
  if (k == cplx(0.0)) {
    throw Error(ErrorKind::invalid_argument, "volume velocity needs k != 0");
  }
  const State psi = field(k, x);
  return -k * k * profile().radius(x) * psi[0] / profile().endpoints().r0;
}

cplx ForwardModel::evaluate(Quantity q, cplx k) const {
  switch (q) {
    case Quantity::G: return G(k);
    case Quantity::F: return F(k);
    case Quantity::P_lips: return lip_pressure(k);
    case Quantity::P_lips_abs: return std::abs(lip_pressure(k));
    case Quantity::phi_ell: return phi_ell(k)[0];
    case Quantity::phi_prime_ell: return phi_ell(k)[1];
    case Quantity::z: return z_eval(k, impedance_);
  }
  return 0.0;
}

double ForwardModel::gamma() const {
  const auto& p = profile();
  const double integral =
      p.potential_vanishes()
          ? 0.0
          : integrate_gl([&](double x) { return p.potential(x); }, 0.0,
                         p.ell(), 64, 16);
  return p.endpoints().r0_prime / p.endpoints().r0 + 0.5 * integral;
}

Eigen::VectorXcd parallel_map(const std::function<cplx(double)>& eval,
                              const Eigen::VectorXd& k, int threads) {
  const Eigen::Index n = k.size();
  Eigen::VectorXcd out(n);
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, static_cast<int>(std::max<Eigen::Index>(n, 1)));

  std::mutex mutex;
  std::vector<Eigen::Index> failed;
  std::string first_message;
  auto work = [&](int w) {
    for (Eigen::Index i = w; i < n; i += workers) {
      try {
        out[i] = eval(k[i]);
      } catch (const std::exception& ex) {
        std::lock_guard lock(mutex);
        if (failed.empty()) first_message = ex.what();
        failed.push_back(i);
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (!failed.empty()) {
    std::sort(failed.begin(), failed.end());
    std::string list;
    for (std::size_t j = 0; j < failed.size() && j < 10; ++j) {
      list += (j ? ", " : "") + std::to_string(failed[j]);
    }
    if (failed.size() > 10) list += ", ...";
    throw Error(ErrorKind::numeric,
                "sweep failed at " + std::to_string(failed.size()) +
                    " point(s) [" + list + "]: " + first_message);
  }
  return out;
}

SpectralCurve sweep(const ForwardModel& model, Quantity quantity,
                    const Eigen::VectorXd& k_grid, int threads) {
  for (Eigen::Index i = 1; i < k_grid.size(); ++i) {
    if (!(k_grid[i] > k_grid[i - 1])) {
      throw Error(ErrorKind::invalid_argument,
                  "sweep grid must be strictly increasing");
    }
  }
  SpectralCurve curve;
  curve.k = k_grid;
  curve.label = quantity;
  curve.values = parallel_map(
      [&](double k) { return model.evaluate(quantity, k); }, k_grid, threads);
  return curve;
}

cplx G_eval(cplx k, const RadiusProfile& profile, const ImpedanceModel& model) {
  const auto& e = profile.endpoints();
  const SchrodingerSolver solver(profile);
  const State phi = solver.transfer(k) * State(1.0, e.r0_prime / e.r0);
  const cplx z = z_eval(k, model);
  return phi[0] * ((e.r_ell_prime / e.r_ell) * z - I * k) - phi[1] * z;
}

cplx jost_function(cplx k, const RadiusProfile& profile) {
  return ForwardModel(profile).F(k);
}

cplx pressure(cplx k, double x, const RadiusProfile& profile,
              const ImpedanceModel& model, const PhysicalConstants& constants) {
  return ForwardModel(profile, model, constants).pressure(k, x);
}

cplx lip_pressure(cplx k, const RadiusProfile& profile,
                  const ImpedanceModel& model,
                  const PhysicalConstants& constants) {
  return ForwardModel(profile, model, constants).lip_pressure(k);
}

cplx volume_velocity(cplx k, double x, const RadiusProfile& profile,
                     const PhysicalConstants& constants) {
  return ForwardModel(profile, constants).volume_velocity(k, x);
}

}  // namespace vtract
