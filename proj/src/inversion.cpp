#include "vtract/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/QR>

#include "vtract/impedance.hpp"
#include "vtract/outer.hpp"

namespace vtract {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void coverage_error(const std::string& what, double lo,
                                 double hi) {
  throw Error(ErrorKind::pipeline, what + ": need samples covering [" +
                                       fmt(lo) + ", " + fmt(hi) + "]");
}

std::vector<Eigen::Index> window(const Eigen::VectorXd& k, double lo,
                                 double hi, Eigen::Index stride = 1) {
  std::vector<Eigen::Index> idx;
  Eigen::Index seen = 0;
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    if (k[i] >= lo - 1e-12 && k[i] <= hi + 1e-12) {
      if (seen++ % stride == 0) idx.push_back(i);
    }
  }
  return idx;
}

// Value at 0 of a least-squares polynomial in (k/hi)^2 over [lo, hi].
double even_fit_at_zero(const Eigen::VectorXd& k, const Eigen::VectorXd& y,
                        double lo, double hi, int degree) {
  const auto idx = window(k, lo, hi);
  if (static_cast<int>(idx.size()) < degree + 3) {
    coverage_error("small-k limit fit", lo, hi);
  }
  Eigen::MatrixXd M(idx.size(), degree + 1);
  Eigen::VectorXd v(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double s = std::pow(k[idx[r]] / hi, 2);
    double p = 1.0;
    for (int j = 0; j <= degree; ++j, p *= s) M(r, j) = p;
    v[r] = y[idx[r]];
  }
  const Eigen::VectorXd c = M.colPivHouseholderQr().solve(v);
  return c[0];
}

// r_ell from lim_{k->0} |P|/k = 8 c mu / (3 pi^2 r_ell).
double small_k_radius(const Eigen::VectorXd& k, const Eigen::VectorXd& absP,
                      double lo, double hi, int degree,
                      const PhysicalConstants& pc) {
  Eigen::VectorXd y(k.size());
  for (Eigen::Index i = 0; i < k.size(); ++i) y[i] = std::pow(k[i] / absP[i], 2);
  const double y0 = even_fit_at_zero(k, y, lo, hi, degree);
  if (!(y0 > 0.0)) {
    throw Error(ErrorKind::pipeline, "small-k limit of |P|/k is not positive");
  }
  return 8.0 * pc.c * pc.mu * std::sqrt(y0) / (3.0 * kPi * kPi);
}

// a of the fit |P| ~ a + b/k over [lo, hi]; a = c mu / (pi r0 r_ell).
double plateau(const Eigen::VectorXd& k, const Eigen::VectorXd& absP,
               double lo, double hi) {
  const auto idx = window(k, lo, hi);
  if (idx.size() < 4) coverage_error("large-k plateau fit", lo, hi);
  Eigen::MatrixXd M(idx.size(), 2);
  Eigen::VectorXd v(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    M(r, 0) = 1.0;
    M(r, 1) = 1.0 / k[idx[r]];
    v[r] = absP[idx[r]];
  }
  return M.colPivHouseholderQr().solve(v)[0];
}

Eigen::VectorXcd z_on(const Eigen::VectorXd& k, double r_ell) {
  const ImpedanceModel zm(r_ell);
  Eigen::VectorXcd z(k.size());
  for (Eigen::Index i = 0; i < k.size(); ++i) z[i] = z_eval(k[i], zm);
  return z;
}

void require_grid(const Eigen::VectorXd& k) {
  if (k.size() < 8) {
    throw Error(ErrorKind::invalid_argument, "spectrum needs at least 8 samples");
  }
  if (!(k[0] > 0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "spectrum grid must lie in k > 0 (z vanishes at 0)");
  }
  for (Eigen::Index i = 1; i < k.size(); ++i) {
    if (!(k[i] > k[i - 1])) {
      throw Error(ErrorKind::invalid_argument,
                  "spectrum grid must be strictly increasing");
    }
  }
}

// Linear least squares of r0 phi and r0 u / k against the asymptotic basis
// at a fixed ell.
struct LinearFit {
  Eigen::Vector4d phi_coef;
  Eigen::Vector4d u_coef;
  double rss = 0.0;
  Eigen::Index points = 0;
};

class AsymptoticProblem {
 public:
  AsymptoticProblem(const Eigen::VectorXd& k, const Eigen::VectorXcd& G,
                    double r_ell, bool phase_free)
      : k_(k), G_(G), z_(z_on(k, r_ell)), phase_free_(phase_free) {}

  LinearFit fit(double ell, const std::vector<Eigen::Index>& idx) const {
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd A(m, 4), B(m, 4);
    Eigen::VectorXd va(m), vb(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Index i = idx[r];
      const double k = k_[i];
      const cplx g = phase_free_ ? G_[i] * std::exp(kI * (k * ell)) : G_[i];
      const cplx z = z_[i];
      const double u = g.real() / z.real();
      const double ph = (z.imag() * g.real() - z.real() * g.imag()) /
                        (k * z.real());
      const double c = std::cos(k * ell), s = std::sin(k * ell);
      const double k2 = k * k;
      A.row(r) << c, s / k, c / k2, s / (k2 * k);
      va[r] = ph;
      B.row(r) << s, c / k, s / k2, c / (k2 * k);
      vb[r] = u / k;
    }
    LinearFit f;
    f.phi_coef = A.colPivHouseholderQr().solve(va);
    f.u_coef = B.colPivHouseholderQr().solve(vb);
    f.rss = (A * f.phi_coef - va).squaredNorm() +
            (B * f.u_coef - vb).squaredNorm();
    f.points = m;
    return f;
  }

 private:
  const Eigen::VectorXd& k_;
  const Eigen::VectorXcd& G_;
  Eigen::VectorXcd z_;
  bool phase_free_;
};

// Zeros of the asymptotic model beyond the catalog radius, on the two
// branches of the first quadrant: the dominant one (density ell/pi) and the
// radiation branch (density r_ell/pi) where 2i/pi + B(k r_ell) vanishes.
std::vector<cplx> model_tail_zeros(double ell, double r_ell,
                                   double r_ell_prime, double gamma, double R,
                                   double k_max) {
  auto G = [&](cplx k) {
    return asymptotic_G(k, ell, r_ell, r_ell_prime, gamma);
  };
  auto newton = [&](cplx k) -> std::optional<cplx> {
    for (int it = 0; it < 50; ++it) {
      const cplx h = 1e-6 * std::max(1.0, std::abs(k));
      const cplx d = (G(k + h) - G(k - h)) / (2.0 * h);
      const cplx step = G(k) / d;
      k -= step;
      if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) break;
      if (std::abs(step) < 1e-13 * std::abs(k)) return k;
    }
    return std::nullopt;
  };

  std::vector<cplx> out;
  auto keep = [&](std::optional<cplx> k) {
    if (!k) return;
    if (!(k->real() > 0.0 && k->imag() > 0.0)) return;
    const double m = std::abs(*k);
    if (m < R || m > k_max) return;
    out.push_back(*k);
  };
  for (int n = 0;; ++n) {
    const double re = (2.0 * kPi * n + 0.5 * kPi) / (2.0 * ell);
    if (re > 1.01 * k_max) break;
    if (re < 0.5 * R) continue;
    cplx k(re, 0.1);
    for (int it = 0; it < 10; ++it) {
      const cplx W = (2.0 * kI / kPi + b_factor(k * r_ell)) / (2.0 * k * r_ell);
      k = (2.0 * kPi * n + std::arg(W) - kI * std::log(std::abs(W))) /
          (2.0 * ell);
    }
    keep(newton(k));
  }
  for (int n = 1;; ++n) {
    const double re = kPi * n / r_ell;
    if (re > 1.01 * k_max) break;
    if (re < 0.5 * R) continue;
    cplx k(re, 0.5);
    for (int it = 0; it < 10; ++it) {
      const cplx Q = -2.0 * kI * std::sqrt(2.0 * kPi * k * r_ell) /
                     (kPi * (1.0 - kI));
      k = (2.0 * kPi * n - std::arg(Q) + kI * std::log(std::abs(Q))) /
          (2.0 * r_ell);
    }
    keep(newton(k));
  }
  std::sort(out.begin(), out.end(),
            [](cplx a, cplx b) { return a.real() < b.real(); });
  std::vector<cplx> unique;
  for (const cplx& k : out) {
    bool dup = false;
    for (auto it = unique.rbegin(); it != unique.rend() && it - unique.rbegin() < 8;
         ++it) {
      if (std::abs(*it - k) < 1e-8 * (1.0 + std::abs(k))) dup = true;
    }
    if (!dup) unique.push_back(k);
  }
  return unique;
}

// Uniform density D of zeros on [K, inf) folded into a genus-one product:
// ln of the factor is D (-K ln(1 - k^2/K^2) - k ln((K + k)/(K - k))).
cplx continuum_log(cplx k, double D, double K) {
  if (K <= 0.0 || D == 0.0) return 0.0;
  return D * (-K * std::log(1.0 - k * k / (K * K)) -
              k * std::log((K + k) / (K - k)));
}

struct SlopeFit {
  double minus = 0.0;  // growth of ln|E(-i kappa)|
  double plus = 0.0;   // growth of ln|E(i kappa)|
};

// ln|E(-i kappa)| = a kappa + ln kappa + c + d/kappa and
// ln|E(i kappa)| = a kappa - ln(kappa)/2 + c + d/kappa over [lo, hi].
template <class LogAbs>
SlopeFit imaginary_slopes(const LogAbs& log_abs, double lo, double hi) {
  const int n = 48;
  auto fit = [&](double sign, double log_coef) {
    Eigen::MatrixXd M(n, 3);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
      const double kap = lo + (hi - lo) * i / (n - 1);
      M.row(i) << kap, 1.0, 1.0 / kap;
      v[i] = log_abs(sign * kap) - log_coef * std::log(kap);
    }
    return Eigen::VectorXd(M.colPivHouseholderQr().solve(v))[0];
  };
  return {fit(-1.0, 1.0), fit(1.0, -0.5)};
}

}  // namespace

std::string to_string(DataKind kind) {
  switch (kind) {
    case DataKind::pressure: return "pressure";
    case DataKind::magnitude: return "magnitude";
    case DataKind::length_zeros: return "length-zeros";
    case DataKind::radius_zeros: return "radius-zeros";
    case DataKind::length_product: return "length-product";
    case DataKind::radius_product: return "radius-product";
  }
  return "unknown";
}

DataKind data_kind_from_string(const std::string& name) {
  for (DataKind k : {DataKind::pressure, DataKind::magnitude,
                     DataKind::length_zeros, DataKind::radius_zeros,
                     DataKind::length_product, DataKind::radius_product}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::parse, "unknown data kind '" + name + "'");
}

DataKind detect_kind(bool spectrum, bool magnitude, bool poles4, bool poles1,
                     bool ell, bool r_ell) {
  if (spectrum) return DataKind::pressure;
  if (magnitude) return DataKind::magnitude;
  if (poles1 && ell) return DataKind::length_zeros;
  if (poles1 && r_ell) return DataKind::radius_zeros;
  (void)poles4;
  throw Error(ErrorKind::parse,
              "cannot infer a data set; give one of: --spectrum (complex lip "
              "pressure); --magnitude [--poles4] (modulus plus any fourth-quadrant zeros); --poles1 [--poles4] with "
              "--ell; --poles1 [--poles4] with --rell");
}

void DataSet::validate() const {
  switch (kind) {
    case DataKind::pressure:
    case DataKind::magnitude:
      require_grid(curve.k);
      if (curve.values.size() != curve.k.size()) {
        throw Error(ErrorKind::invalid_argument, "curve size mismatch");
      }
      break;
    case DataKind::length_zeros:
    case DataKind::length_product:
      if (!ell || !(*ell > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "data set needs ell > 0");
      }
      break;
    case DataKind::radius_zeros:
    case DataKind::radius_product:
      if (!r_ell || !(*r_ell > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "data set needs r_ell > 0");
      }
      break;
  }
  for (const Zero& z : zeros.first_quadrant) {
    if (!(z.k.real() > 0.0 && z.k.imag() > 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "first-quadrant zero outside the open first quadrant");
    }
  }
  for (const Zero& z : zeros.fourth_quadrant) {
    if (!(z.k.real() > 0.0 && z.k.imag() < 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "fourth-quadrant zero outside the open fourth quadrant");
    }
  }
  const bool needs_product = kind == DataKind::length_zeros ||
                             kind == DataKind::radius_zeros ||
                             kind == DataKind::length_product ||
                             kind == DataKind::radius_product;
  if (needs_product && zeros.first_quadrant.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "zero-set data needs first-quadrant zeros");
  }
}

void Diagnostics::put(const std::string& key, double value) {
  put(key, fmt(value));
}

void Diagnostics::put(const std::string& key, const std::string& value) {
  for (auto& [k, v] : items_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  items_.emplace_back(key, value);
}

std::optional<std::string> Diagnostics::get(const std::string& key) const {
  for (const auto& [k, v] : items_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::optional<double> Diagnostics::number(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string Diagnostics::str() const {
  std::string out;
  for (const auto& [k, v] : items_) out += k + "=" + v + "\n";
  return out;
}

cplx asymptotic_G(cplx k, double ell, double r_ell, double r_ell_prime,
                  double gamma) {
  const cplx z = z_eval(k, ImpedanceModel(r_ell));
  const cplx phi = std::cos(k * ell) + gamma * std::sin(k * ell) / k;
  const cplx dphi = -k * std::sin(k * ell) + gamma * std::cos(k * ell);
  return phi * ((r_ell_prime / r_ell) * z - kI * k) - dphi * z;
}

AsymptoticFit fit_asymptotics(const Eigen::VectorXd& k,
                              const Eigen::VectorXcd& G_scaled, double r_ell,
                              std::optional<double> ell,
                              const InversionOptions& options,
                              bool phase_free) {
  require_grid(k);
  const double kmax = k[k.size() - 1];
  const double fit_hi = std::min(options.fit_k_hi, phase_free ? 0.75 * kmax : kmax);
  const auto fit_idx = window(k, options.fit_k_lo, fit_hi);
  if (fit_idx.size() < 40) {
    coverage_error("real-axis asymptotic fit", options.fit_k_lo,
                   options.fit_k_hi);
  }
  const AsymptoticProblem problem(k, G_scaled, r_ell, phase_free);

  double L = 0.0;
  if (ell) {
    L = *ell;
  } else {
    const double scan_hi = std::min(options.scan_k_hi, fit_hi);
    auto probe = window(k, options.scan_k_lo, scan_hi);
    const Eigen::Index stride = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(probe.size()) / 400);
    probe = window(k, options.scan_k_lo, scan_hi, stride);
    if (probe.size() < 40) {
      coverage_error("length scan", options.scan_k_lo, options.scan_k_hi);
    }
    double best = options.ell_scan_lo, best_rss = INFINITY;
    for (double t = options.ell_scan_lo; t <= options.ell_scan_hi;
         t += options.ell_scan_step) {
      const double r = problem.fit(t, probe).rss;
      if (r < best_rss) {
        best_rss = r;
        best = t;
      }
    }
    // Golden-section refinement on the full window.
    double lo = best - options.ell_scan_step, hi = best + options.ell_scan_step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    double fa = problem.fit(a, fit_idx).rss, fb = problem.fit(b, fit_idx).rss;
    for (int it = 0; it < 80 && hi - lo > 1e-12 * best; ++it) {
      if (fa < fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - g * (hi - lo);
        fa = problem.fit(a, fit_idx).rss;
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + g * (hi - lo);
        fb = problem.fit(b, fit_idx).rss;
      }
    }
    L = 0.5 * (lo + hi);
  }

  const LinearFit f = problem.fit(L, fit_idx);
  AsymptoticFit out;
  out.ell = L;
  out.amplitude = f.phi_coef[0];
  if (!(out.amplitude > 0.0)) {
    throw Error(ErrorKind::pipeline, "asymptotic amplitude is not positive");
  }
  out.gamma = f.phi_coef[1] / out.amplitude;
  out.r_ell_prime = r_ell * (f.u_coef[1] / out.amplitude + out.gamma);
  out.rms = std::sqrt(f.rss / static_cast<double>(2 * f.points));
  return out;
}

std::pair<double, double> sample_asymptotes(
    const std::function<cplx(double)>& G, double ell, double r_ell,
    double k_lo, double k_hi) {
  const ImpedanceModel zm(r_ell);
  double slope = 0.0, gamma = 0.0;
  int ns = 0, ng = 0;
  for (int n = 1;; ++n) {
    const double k0 = 2.0 * kPi * n / ell;
    const double k1 = k0 + 0.5 * kPi / ell;
    if (k0 > k_hi) break;
    if (k0 >= k_lo) {
      slope += ((G(k0) + kI * k0) / z_eval(k0, zm)).real();
      ++ns;
    }
    if (k1 >= k_lo && k1 <= k_hi) {
      gamma += (kI * (G(k1) - k1 * z_eval(k1, zm))).real();
      ++ng;
    }
  }
  if (ns == 0 || ng == 0) {
    throw Error(ErrorKind::pipeline, "no asymptote samples in the window");
  }
  return {slope / ns, gamma / ng};
}

ProductConstants recover_constants(const ZeroCatalog& catalog,
                                   std::optional<double> ell,
                                   std::optional<double> r_ell,
                                   const InversionOptions& options) {
  if (ell.has_value() == r_ell.has_value()) {
    throw Error(ErrorKind::invalid_argument,
                "give exactly one of ell and r_ell with a zero set");
  }
  if (catalog.first_quadrant.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "zero-set route needs first-quadrant zeros");
  }
  double R = catalog.search_radius;
  if (!(R > 0.0)) {
    for (const Zero& z : catalog.first_quadrant) R = std::max(R, std::abs(z.k));
  }

  ProductConstants out;
  Diagnostics& d = out.diagnostics;
  d.put("catalog_radius", R);
  d.put("catalog_first_quadrant",
        static_cast<double>(catalog.count_first(R)));
  d.put("catalog_fourth_quadrant",
        static_cast<double>(catalog.count_fourth(R)));

  // Starting point from the zero density (ell + r_ell)/pi.
  const double width = kPi * catalog.count_first(R) / R;
  double L = ell ? *ell : width - *r_ell;
  double rl = r_ell ? *r_ell : width - *ell;
  d.put("density_width", width);
  if (!(L > 0.0) || !(rl > 0.0)) {
    throw Error(ErrorKind::pipeline,
                "zero density is inconsistent with the given constant");
  }

  // Gauss-Newton on the missing constant, r_ell' and gamma: the zeros of the
  // asymptotic model must sit on the catalog zeros of the outer band.
  std::vector<cplx> band;
  for (const Zero& z : catalog.first_quadrant) {
    if (std::abs(z.k) >= options.match_band * R) band.push_back(z.k);
  }
  if (band.size() < 6) {
    throw Error(ErrorKind::pipeline,
                "too few catalog zeros in the matching band; raise the search "
                "radius");
  }
  Eigen::Vector3d th(ell ? rl : L, 0.0, 0.0);
  auto residual = [&](const Eigen::Vector3d& t) {
    const double l = ell ? *ell : t[0];
    const double r = ell ? t[0] : *r_ell;
    Eigen::VectorXd res(2 * band.size());
    for (std::size_t j = 0; j < band.size(); ++j) {
      auto G = [&](cplx q) { return asymptotic_G(q, l, r, t[1], t[2]); };
      const cplx k = band[j];
      const cplx h = 1e-6 * std::abs(k);
      const cplx step = G(k) * 2.0 * h / (G(k + h) - G(k - h));
      res[2 * j] = step.real();
      res[2 * j + 1] = step.imag();
    }
    return res;
  };
  // Coarse scan of the unknown first: a start off by more than half a zero
  // spacing at the band edge converges to a neighbouring branch.
  {
    const double x0 = th[0];
    double best = x0, best_cost = INFINITY;
    for (double x = std::max(0.05, x0 - 1.0); x <= x0 + 1.0; x += 0.005) {
      Eigen::Vector3d t(x, 0.0, 0.0);
      const Eigen::VectorXd r = residual(t);
      double cost = 0.0;
      for (Eigen::Index i = 0; i < r.size(); i += 2) {
        cost += std::min(std::hypot(r[i], r[i + 1]), 1.0);
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = x;
      }
    }
    th[0] = best;
  }
  double rms = INFINITY;
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd r = residual(th);
    rms = r.norm() / std::sqrt(static_cast<double>(r.size()));
    Eigen::MatrixXd J(r.size(), 3);
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d t2 = th;
      t2[c] += 1e-6;
      J.col(c) = (residual(t2) - r) / 1e-6;
    }
    const Eigen::Vector3d step = J.colPivHouseholderQr().solve(-r);
    th += step;
    if (!std::isfinite(th.norm())) {
      throw Error(ErrorKind::pipeline, "zero matching diverged");
    }
    if (step.norm() < 1e-12 * (1.0 + th.norm())) break;
  }
  if (ell) {
    rl = th[0];
  } else {
    L = th[0];
  }
  const double r_ell_prime = th[1], gamma = th[2];
  d.put("zero_match_rms", rms);
  d.put("zero_match_zeros", static_cast<double>(band.size()));
  if (!(L > 0.0) || !(rl > 0.0)) {
    throw Error(ErrorKind::pipeline, "zero matching gives non-positive ell or r_ell");
  }

  // Canonical product of catalog plus model tail plus continuum; its growth
  // along -i kappa fixes the shift C, the growth along +i kappa is a check.
  const double K = options.tail_k_max;
  const double D = (L + rl) / kPi;
  ZeroCatalog ext = catalog;
  const auto tail = model_tail_zeros(L, rl, r_ell_prime, gamma, R, K);
  for (const cplx& k : tail) ext.first_quadrant.push_back({k, 1});
  out.tail_zeros = static_cast<int>(tail.size());
  const auto E = std::make_shared<HadamardFactor>(std::move(ext));
  auto log_abs = [&](double kap) {
    return E->log_abs_imag(kap) + continuum_log(cplx(0.0, kap), D, K).real();
  };
  const SlopeFit s = imaginary_slopes(log_abs, options.kappa_lo, options.kappa_hi);
  const SlopeFit s2 =
      imaginary_slopes(log_abs, options.kappa_lo_alt, options.kappa_hi_alt);
  const double C = L - s.minus;
  d.put("tail_zeros", static_cast<double>(out.tail_zeros));
  d.put("tail_k_max", K);
  d.put("tail_density", D);
  d.put("C_alt_window", L - s2.minus);
  d.put("width_from_growth", 0.5 * (s.plus + s.minus));

  out.constants.ell = L;
  out.constants.r_ell = rl;
  out.constants.C = C;
  out.constants.gamma = gamma;
  out.constants.r_ell_prime = r_ell_prime;

  // r_ell/r0 = lim |k|/|E(k)|, averaged over a window of real k.
  double acc = 0.0;
  int n = 0;
  for (double k = 0.5 * options.product_k_max; k <= options.product_k_max;
       k += 0.05, ++n) {
    acc += k / std::abs(E->eval(k) * std::exp(continuum_log(k, D, K)));
  }
  out.constants.r0 = rl / (acc / n);
  d.put("r0_from_product", out.constants.r0);

  out.G_scaled = [E, C, rl, D, K](cplx k) {
    return rl * std::exp(kI * C * k) * E->eval(k) *
           std::exp(continuum_log(k, D, K));
  };
  return out;
}

NormalizedData normalize_dataset(const DataSet& data,
                                 const InversionOptions& options) {
  data.validate();
  const PhysicalConstants& pc = options.constants;
  pc.validate();
  NormalizedData nd;
  Diagnostics& d = nd.diagnostics;
  d.put("data_kind", to_string(data.kind));

  if (data.kind == DataKind::pressure || data.kind == DataKind::magnitude) {
    const Eigen::VectorXd& k = data.curve.k;
    Eigen::VectorXd absP(k.size());
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      absP[i] = data.kind == DataKind::pressure ? std::abs(data.curve.values[i])
                                                : std::abs(data.curve.values[i].real());
      if (!(absP[i] > 0.0) || !std::isfinite(absP[i])) {
        throw Error(ErrorKind::invalid_argument,
                    "lip pressure must be nonzero and finite on the grid");
      }
    }
    const double rl = small_k_radius(k, absP, options.small_k_lo,
                                     options.small_k_hi, options.small_k_degree, pc);
    d.put("r_ell_small_k", rl);
    // Second window, lower degree: a stability check only.
    if (window(k, options.small_k_lo, options.small_k_hi_alt).size() >= 5) {
      d.put("r_ell_small_k_alt",
            small_k_radius(k, absP, options.small_k_lo, options.small_k_hi_alt,
                           2, pc));
    }
    d.put("pressure_slope_k0", 8.0 * pc.c * pc.mu / (3.0 * kPi * kPi * rl));

    const double kmax = k[k.size() - 1];
    if (kmax >= options.plateau_hi) {
      const double a = plateau(k, absP, options.plateau_lo, options.plateau_hi);
      d.put("pressure_plateau", a);
      d.put("r0_plateau", pc.c * pc.mu / (kPi * rl * a));
    }

    const Eigen::VectorXcd z = z_on(k, rl);
    Eigen::VectorXcd Gs(k.size());
    bool phase_free = false;
    if (data.kind == DataKind::pressure) {
      // r0 G = -(i k c mu / (pi r_ell)) z / P
      for (Eigen::Index i = 0; i < k.size(); ++i) {
        Gs[i] = -kI * k[i] * pc.c * pc.mu / (kPi * rl) * z[i] /
                data.curve.values[i];
      }
    } else {
      Eigen::VectorXd absG(k.size());
      for (Eigen::Index i = 0; i < k.size(); ++i) {
        absG[i] = k[i] * pc.c * pc.mu / (kPi * rl) * std::abs(z[i]) / absP[i];
      }
      std::vector<cplx> poles;
      for (const Zero& zz : data.zeros.fourth_quadrant) {
        for (int m = 0; m < zz.multiplicity; ++m) poles.push_back(zz.k);
      }
      const OuterReconstruction outer(k, absG, poles, 0.0);
      Gs = outer.on_grid();
      d.put("outer_tail_bound_k10", outer.tail_bound(std::min(10.0, 0.5 * kmax)));
      phase_free = true;
    }

    const AsymptoticFit fit =
        fit_asymptotics(k, Gs, rl, std::nullopt, options, phase_free);
    RecoveredConstants& c = nd.constants;
    c.r_ell = rl;
    c.r0 = fit.amplitude;
    c.ell = fit.ell;
    c.gamma = fit.gamma;
    c.r_ell_prime = fit.r_ell_prime;
    c.C = 0.0;
    d.put("asymptotic_fit_rms", fit.rms);

    nd.k = k;
    nd.G.resize(k.size());
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      const cplx g = phase_free ? Gs[i] * std::exp(kI * (k[i] * c.ell)) : Gs[i];
      nd.G[i] = g / c.r0;
    }
    return nd;
  }

  // Zero-set routes: constants from the catalog, then r0 G on a graded real
  // grid and the real-axis fit for r0 with ell fixed.
  const bool by_length = data.kind == DataKind::length_zeros ||
                         data.kind == DataKind::length_product;
  const ProductConstants pcst =
      recover_constants(data.zeros, by_length ? data.ell : std::nullopt,
                        by_length ? std::nullopt : data.r_ell, options);
  for (const auto& [key, v] : pcst.diagnostics.items()) d.put(key, v);

  const Eigen::VectorXd k = graded_k_grid(options.product_k_max);
  Eigen::VectorXcd Gs(k.size());
  for (Eigen::Index i = 0; i < k.size(); ++i) Gs[i] = pcst.G_scaled(k[i]);
  const AsymptoticFit fit = fit_asymptotics(
      k, Gs, pcst.constants.r_ell, pcst.constants.ell, options, false);
  RecoveredConstants& c = nd.constants;
  c = pcst.constants;
  c.r0 = fit.amplitude;
  d.put("asymptotic_fit_rms", fit.rms);
  d.put("gamma_real_axis", fit.gamma);
  d.put("r_ell_prime_real_axis", fit.r_ell_prime);

  const auto Gh = pcst.G_scaled;
  const double r0 = c.r0;
  nd.G_handle = [Gh, r0](cplx kk) { return Gh(kk) / r0; };
  nd.k = k;
  nd.G = Gs / r0;
  return nd;
}

Eigen::VectorXd graded_k_grid(double k_max) {
  if (!(k_max > 1.0)) {
    throw Error(ErrorKind::invalid_argument, "graded grid needs k_max > 1");
  }
  std::vector<double> k;
  for (int i = 1; i <= 2000; ++i) k.push_back(1e-4 * i);
  for (int i = 401; i <= 2000; ++i) k.push_back(5e-4 * i);
  for (int i = 101; 0.01 * i <= k_max + 1e-9; ++i) k.push_back(0.01 * i);
  return Eigen::Map<Eigen::VectorXd>(k.data(), static_cast<Eigen::Index>(k.size()));
}

PhiCurves phi_at_ell(const Eigen::VectorXd& k, const Eigen::VectorXcd& G,
                     const RecoveredConstants& c) {
  require_grid(k);
  if (G.size() != k.size()) {
    throw Error(ErrorKind::invalid_argument, "G and k sizes differ");
  }
  const Eigen::VectorXcd z = z_on(k, c.r_ell);
  const Eigen::Index n = k.size();
  PhiCurves out;
  out.k.resize(n + 1);
  out.phi.resize(n + 1);
  out.phi_prime.resize(n + 1);
  out.k[0] = 0.0;
  out.phi[0] = c.r_ell / c.r0;
  out.phi_prime[0] = c.r_ell_prime / c.r0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rz = z[i].real();
    if (!(rz > 0.0)) {
      throw Error(ErrorKind::numeric,
                  "Re z(k) is not positive at k = " + fmt(k[i]));
    }
    const double ph = (z[i].imag() * G[i].real() - rz * G[i].imag()) / (k[i] * rz);
    const double u = G[i].real() / rz;
    out.k[i + 1] = k[i];
    out.phi[i + 1] = ph;
    out.phi_prime[i + 1] = (c.r_ell_prime / c.r_ell) * ph - u;
  }
  return out;
}

SpectralCurve jost_from_phi(const PhiCurves& curves, double ell) {
  SpectralCurve F;
  F.label = Quantity::F;
  F.k = curves.k;
  F.values.resize(curves.k.size());
  for (Eigen::Index i = 0; i < curves.k.size(); ++i) {
    const double k = curves.k[i];
    F.values[i] = -kI * std::exp(kI * (k * ell)) *
                  (kI * k * curves.phi[i] - curves.phi_prime[i]);
  }
  return F;
}

namespace {

// F on the curve nodes. Splining F rather than phi and phi' removes the
// cos(k ell) carrier, so the interpolant resolves k steps near 1/ell.
Eigen::VectorXd jost_part(const PhiCurves& curves, double ell, bool imag) {
  Eigen::VectorXd out(curves.k.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double k = curves.k[i];
    const cplx F = -kI * std::exp(kI * (k * ell)) *
                   (kI * k * curves.phi[i] - curves.phi_prime[i]);
    out[i] = imag ? F.imag() : F.real();
  }
  return out;
}

}  // namespace

JostInterpolant::JostInterpolant(const PhiCurves& curves, double ell)
    : re_(curves.k, jost_part(curves, ell, false)),
      im_(curves.k, jost_part(curves, ell, true), 0.0),  // Im F is even
      k_max_(curves.k[curves.k.size() - 1]) {}

cplx JostInterpolant::operator()(double k) const {
  if (k < 0.0 || k > k_max_ * (1.0 + 1e-12)) {
    throw Error(ErrorKind::invalid_argument,
                "Jost interpolant queried outside [0, " + fmt(k_max_) + "]");
  }
  return {re_(k), im_(k)};
}

JostNearZero::JostNearZero(const PhiCurves& curves, double ell, double k_fit,
                           int degree)
    : ell_(ell), k_fit_(k_fit) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < curves.k.size(); ++i) {
    if (curves.k[i] <= k_fit) idx.push_back(i);
  }
  if (static_cast<int>(idx.size()) < degree + 4) {
    coverage_error("near-zero continuation of phi", 0.0, k_fit);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd M(m, degree + 1);
  Eigen::VectorXd p(m), q(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double s = std::pow(curves.k[idx[r]] / k_fit, 2);
    double t = 1.0;
    for (int j = 0; j <= degree; ++j, t *= s) M(r, j) = t;
    p[r] = curves.phi[idx[r]];
    q[r] = curves.phi_prime[idx[r]];
  }
  const auto qr = M.colPivHouseholderQr();
  a_ = qr.solve(p);
  b_ = qr.solve(q);
  const double scale = std::max(p.cwiseAbs().maxCoeff(), 1e-300);
  rms_ = std::sqrt(((M * a_ - p).squaredNorm() + (M * b_ - q).squaredNorm()) /
                   static_cast<double>(2 * m)) /
         scale;
}

cplx JostNearZero::operator()(cplx k) const {
  const cplx s = (k / k_fit_) * (k / k_fit_);
  cplx phi = 0.0, dphi = 0.0;
  for (Eigen::Index j = a_.size() - 1; j >= 0; --j) {
    phi = phi * s + a_[j];
    dphi = dphi * s + b_[j];
  }
  return -kI * std::exp(kI * k * ell_) * (kI * k * phi - dphi);
}

cplx jost_from_G(const std::function<cplx(cplx)>& G, cplx k,
                 const RecoveredConstants& c) {
  if (std::abs(k) < 1e-8) return kI * c.r_ell_prime / c.r0;
  const ImpedanceModel zm(c.r_ell);
  const cplx zp = z_eval(k, zm), zm_ = z_eval(-k, zm);
  const cplx gp = G(k), gm = G(-k);
  const cplx s = zp + zm_;
  const cplx phi = (zp * gm - zm_ * gp) / (kI * k * s);
  const cplx u = (gp + gm) / s;
  const cplx dphi = (c.r_ell_prime / c.r_ell) * phi - u;
  return -kI * std::exp(kI * k * c.ell) * (kI * k * phi - dphi);
}

InversionResult invert_pipeline(const DataSet& data,
                                const InversionOptions& options) {
  Diagnostics diag;
  std::string stage = "normalize";
  auto fail = [&](const std::exception& e) -> PipelineError {
    return PipelineError(stage, e.what(), diag);
  };
  try {
    NormalizedData nd = normalize_dataset(data, options);
    diag = nd.diagnostics;
    const RecoveredConstants c = nd.constants;
    diag.put("C", c.C);
    diag.put("r0", c.r0);
    diag.put("r_ell", c.r_ell);
    diag.put("r_ell_prime", c.r_ell_prime);
    diag.put("gamma", c.gamma);
    diag.put("ell", c.ell);

    stage = "phi_at_ell";
    const PhiCurves curves = phi_at_ell(nd.k, nd.G, c);

    stage = "jost";
    const JostInterpolant F(curves, c.ell);
    auto F_real = [&F](double k) { return F(k); };

    stage = "kernel";
    KernelOptions ko = options.kernel;
    const double K_default = 60.0 * kPi / c.ell;
    ko.k_max = std::min(ko.k_max > 0.0 ? ko.k_max : K_default, F.k_max());
    diag.put("kernel_k_max", ko.k_max);
    diag.put("kernel_window_start", ko.k_max * (1.0 - ko.window_fraction));

    const bool has_bound = c.r_ell_prime < -options.bound_state_tolerance;
    diag.put("bound_state_branch", has_bound ? "present" : "absent");
    std::optional<BoundState> bound;
    GLState gl;
    RecoveredProfile rec{RadiusProfile::uniform(c.r0, c.ell), {}, {}, {}, 0.0};

    auto solve = [&](std::optional<BoundState> b) {
      stage = "kernel";
      const GLKernel kernel(F_real, c.ell, b, ko);
      stage = "gl_solve";
      gl = gl_solve(kernel, options.grid_n);
      stage = "recover_profile";
      rec = recover_profile(gl, c.r0);
    };

    if (has_bound) {
      stage = "bound_state";
      const JostNearZero F0(curves, c.ell, options.near_zero_k_ell / c.ell,
                            options.near_zero_degree);
      diag.put("near_zero_fit_rms", F0.rms());
      BoundStateOptions bo;
      bo.kappa_max = F0.k_fit();
      bound = bound_state([&F0](cplx k) { return F0(k); }, c.r_ell_prime,
                          c.ell, bo);
    }
    solve(bound);

    stage = "diagnostics";
    if (bound) {
      diag.put("kappa1", bound->kappa1);
      diag.put("g1_squared", bound->g1_squared);
    } else {
      diag.put("kappa1", "none");
      diag.put("g1_squared", "none");
    }
    diag.put("a00", rec.a00);
    diag.put("gl_min_rcond", gl.min_rcond);
    diag.put("gl_grid_n", static_cast<double>(options.grid_n));
    diag.put("r_min", rec.r.minCoeff());
    diag.put("r_max", rec.r.maxCoeff());

    InversionResult res{rec.profile, c, bound, rec.x, rec.r, rec.q, diag};
    return res;
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw fail(e);
  }
}

DataSet make_dataset(const ForwardModel& model, DataKind kind,
                     const Eigen::VectorXd& k_grid, double search_radius,
                     int threads) {
  DataSet ds;
  ds.kind = kind;
  const EndpointData ends = model.profile().endpoints();
  switch (kind) {
    case DataKind::pressure:
      ds.curve = sweep(model, Quantity::P_lips, k_grid, threads);
      break;
    case DataKind::magnitude: {
      ds.curve = sweep(model, Quantity::P_lips_abs, k_grid, threads);
      ZeroSearchOptions zo;
      zo.type_width = model.profile().ell() + 2.0 * ends.r_ell + 1.0;
      auto g = [&model](cplx k) { return model.G(k); };
      if (count_zeros_in_quarter_disk(g, search_radius, 4, zo) > 0) {
        ds.zeros.fourth_quadrant =
            find_zeros(model, search_radius).fourth_quadrant;
      }
      ds.zeros.search_radius = search_radius;
      break;
    }
    case DataKind::length_zeros:
    case DataKind::length_product:
      ds.zeros = find_zeros(model, search_radius);
      ds.ell = model.profile().ell();
      break;
    case DataKind::radius_zeros:
    case DataKind::radius_product:
      ds.zeros = find_zeros(model, search_radius);
      ds.r_ell = ends.r_ell;
      break;
  }
  return ds;
}

}  // namespace vtract
