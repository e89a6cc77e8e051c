#include "vtract/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vtract/forward.hpp"

namespace vtract {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxBisections = 40;

// Signals a zero on (or numerically at) a contour; callers perturb.
struct BoundaryHit {};

struct Path {
  std::function<cplx(double)> at;  // t in [0, 1]
  double length;
};

Path segment(cplx a, cplx b) {
  return {[a, b](double t) { return a + t * (b - a); }, std::abs(b - a)};
}

Path arc(double radius, double theta0, double theta1) {
  return {[=](double t) {
            return std::polar(radius, theta0 + t * (theta1 - theta0));
          },
          radius * std::abs(theta1 - theta0)};
}

class PhaseWalker {
 public:
  PhaseWalker(const ComplexFunction& g, const ZeroSearchOptions& options)
      : g_(g), options_(options) {}

  double total(const std::vector<Path>& paths) const {
    double sum = 0.0;
    for (const auto& p : paths) sum += along(p);
    return sum;
  }

 private:
  cplx value(cplx k) const {
    const cplx v = g_(k);
    const double mag = std::abs(v);
    if (!std::isfinite(mag) || mag < options_.residual_tol * (1.0 + std::abs(k))) {
      throw BoundaryHit{};
    }
    return v;
  }

  double along(const Path& p) const {
    const double step = 0.25 * kPi / options_.type_width;
    const int n = std::max(2, static_cast<int>(std::ceil(p.length / step)));
    double sum = 0.0;
    double t0 = 0.0;
    cplx g0 = value(p.at(0.0));
    for (int i = 1; i <= n; ++i) {
      const double t1 = static_cast<double>(i) / n;
      const cplx g1 = value(p.at(t1));
      sum += refine(p, t0, t1, g0, g1, 0);
      t0 = t1;
      g0 = g1;
    }
    return sum;
  }

  double refine(const Path& p, double t0, double t1, cplx g0, cplx g1,
                int depth) const {
    const double d = std::arg(g1 / g0);
    const double ratio = std::abs(g1) / std::abs(g0);
    if (std::abs(d) < 0.25 * kPi && ratio > 0.4 && ratio < 2.5) return d;
    if (depth >= kMaxBisections) throw BoundaryHit{};
    const double tm = 0.5 * (t0 + t1);
    const cplx gm = value(p.at(tm));
    return refine(p, t0, tm, g0, gm, depth + 1) +
           refine(p, tm, t1, gm, g1, depth + 1);
  }

  const ComplexFunction& g_;
  const ZeroSearchOptions& options_;
};

std::vector<Path> box_paths(const Box& b) {
  const cplx p0(b.re_lo, b.im_lo), p1(b.re_hi, b.im_lo), p2(b.re_hi, b.im_hi),
      p3(b.re_lo, b.im_hi);
  return {segment(p0, p1), segment(p1, p2), segment(p2, p3), segment(p3, p0)};
}

int winding(const ComplexFunction& g, const std::vector<Path>& paths,
            const ZeroSearchOptions& options) {
  const double turns = PhaseWalker(g, options).total(paths) / (2.0 * kPi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 0.05) throw BoundaryHit{};
  return static_cast<int>(rounded);
}

Box perturbed(const Box& b, int attempt) {
  // Deterministic outward nudges of incommensurate size.
  const double w = b.re_hi - b.re_lo, h = b.im_hi - b.im_lo;
  const double s = 1e-4 * attempt * (1.0 + 0.618 * attempt);
  return {b.re_lo, b.re_hi + s * w, b.im_lo, b.im_hi + 0.7 * s * h};
}

class Searcher {
 public:
  Searcher(const ComplexFunction& g, double radius,
           const ZeroSearchOptions& options)
      : g_(g), radius_(radius), options_(options) {}

  void run(const Box& box, std::vector<Zero>& out, int& rejected) {
    out_ = &out;
    rejected_ = &rejected;
    int n = -1;
    Box b = box;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      try {
        n = winding(g_, box_paths(b), options_);
        break;
      } catch (const BoundaryHit&) {
        b = perturbed(box, attempt + 1);
      }
    }
    if (n < 0) {
      throw Error(ErrorKind::zero_search,
                  "zero search: contour keeps touching a zero");
    }
    search(b, n);
  }

 private:
  static double min_modulus(const Box& b) {
    const double x = std::clamp(0.0, b.re_lo, b.re_hi);
    const double y = std::clamp(0.0, b.im_lo, b.im_hi);
    return std::abs(cplx(x, y));
  }

  void search(const Box& b, int n) {
    if (n <= 0) return;
    if (min_modulus(b) > radius_) return;
    const double w = b.re_hi - b.re_lo;
    const double h = b.im_hi - b.im_lo;
    const double side = std::max(w, h);
    if (n == 1 && side <= options_.newton_box) {
      if (auto k = newton(b)) {
        record({*k, 1});
        return;
      }
    }
    if (side <= options_.min_box) {
      if (n >= 2) {
        record({cplx(0.5 * (b.re_lo + b.re_hi), 0.5 * (b.im_lo + b.im_hi)), n});
        return;
      }
      throw Error(ErrorKind::zero_search,
                  "zero search: Newton did not converge in box [" +
                      std::to_string(b.re_lo) + ", " + std::to_string(b.re_hi) +
                      "] x [" + std::to_string(b.im_lo) + ", " +
                      std::to_string(b.im_hi) + "]");
    }
    static constexpr double kFractions[] = {0.5, 0.4731, 0.5269, 0.4417,
                                            0.5583, 0.4102, 0.5898};
    for (double f : kFractions) {
      Box lo = b, hi = b;
      if (w >= h) {
        lo.re_hi = hi.re_lo = b.re_lo + f * w;
      } else {
        lo.im_hi = hi.im_lo = b.im_lo + f * h;
      }
      int n_lo, n_hi;
      try {
        n_lo = min_modulus(lo) > radius_ ? 0 : winding(g_, box_paths(lo), options_);
        n_hi = min_modulus(hi) > radius_ ? n - n_lo
                                          : winding(g_, box_paths(hi), options_);
      } catch (const BoundaryHit&) {
        continue;
      }
      if (n_lo + n_hi != n && min_modulus(lo) <= radius_ &&
          min_modulus(hi) <= radius_) {
        continue;
      }
      search(lo, n_lo);
      search(hi, n_hi);
      return;
    }
    throw Error(ErrorKind::zero_search,
                "zero search: inconsistent sub-box counts near (" +
                    std::to_string(b.re_lo) + ", " + std::to_string(b.im_lo) +
                    ")");
  }

  std::optional<cplx> newton(const Box& b) const {
    const double side = std::max(b.re_hi - b.re_lo, b.im_hi - b.im_lo);
    cplx k(0.5 * (b.re_lo + b.re_hi), 0.5 * (b.im_lo + b.im_hi));
    for (int it = 0; it < 60; ++it) {
      const cplx gk = g_(k);
      const double tol = options_.residual_tol * (1.0 + std::abs(k));
      if (std::abs(gk) < tol) {
        return inside(b, k) ? std::optional<cplx>(k) : std::nullopt;
      }
      const double h = 1e-6 * (1.0 + std::abs(k));
      const cplx dg = (g_(k + h) - g_(k - h)) / (2.0 * h);
      if (dg == cplx(0.0)) return std::nullopt;
      cplx step = gk / dg;
      if (std::abs(step) > side) step *= side / std::abs(step);
      k -= step;
      if (!inside(b, k, 0.5)) return std::nullopt;
    }
    return std::nullopt;
  }

  static bool inside(const Box& b, cplx k, double margin = 1e-9) {
    const double w = b.re_hi - b.re_lo, h = b.im_hi - b.im_lo;
    return k.real() >= b.re_lo - margin * w && k.real() <= b.re_hi + margin * w &&
           k.imag() >= b.im_lo - margin * h && k.imag() <= b.im_hi + margin * h;
  }

  void record(const Zero& z) {
    if (std::abs(z.k) >= radius_) return;
    if (std::abs(z.k.imag()) < options_.axis_band ||
        z.k.real() < options_.axis_band) {
      ++*rejected_;
      return;
    }
    out_->push_back(z);
  }

  const ComplexFunction& g_;
  double radius_;
  const ZeroSearchOptions& options_;
  std::vector<Zero>* out_ = nullptr;
  int* rejected_ = nullptr;
};

void sort_by_modulus(std::vector<Zero>& zs) {
  std::sort(zs.begin(), zs.end(), [](const Zero& a, const Zero& b) {
    return std::abs(a.k) < std::abs(b.k);
  });
}

}  // namespace

int ZeroCatalog::count_first(double rho) const {
  int n = 0;
  for (const auto& z : first_quadrant) {
    if (std::abs(z.k) < rho) n += z.multiplicity;
  }
  return n;
}

int ZeroCatalog::count_fourth(double rho) const {
  int n = 0;
  for (const auto& z : fourth_quadrant) {
    if (std::abs(z.k) < rho) n += z.multiplicity;
  }
  return n;
}

int count_zeros_in_box(const ComplexFunction& g, const Box& box,
                       const ZeroSearchOptions& options) {
  if (!(box.re_hi > box.re_lo) || !(box.im_hi > box.im_lo)) {
    throw Error(ErrorKind::invalid_argument, "count_zeros_in_box: empty box");
  }
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    try {
      return winding(g, box_paths(attempt ? perturbed(box, attempt) : box),
                     options);
    } catch (const BoundaryHit&) {
    }
  }
  throw Error(ErrorKind::zero_search,
              "count_zeros_in_box: boundary too close to a zero");
}

int count_zeros_in_quarter_disk(const ComplexFunction& g, double rho,
                                int quadrant,
                                const ZeroSearchOptions& options) {
  if (quadrant != 1 && quadrant != 4) {
    throw Error(ErrorKind::invalid_argument, "quadrant must be 1 or 4");
  }
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    const double r = rho * (1.0 + 1e-5 * attempt);
    const double e = options.axis_band;
    const double far = std::sqrt(r * r - e * e);
    const double lo = std::asin(e / r), hi = std::acos(e / r);
    std::vector<Path> paths;
    if (quadrant == 1) {
      paths = {segment({e, e}, {far, e}), arc(r, lo, hi),
               segment({e, far}, {e, e})};
    } else {
      paths = {segment({e, -e}, {e, -far}), arc(r, -hi, -lo),
               segment({far, -e}, {e, -e})};
    }
    try {
      return winding(g, paths, options);
    } catch (const BoundaryHit&) {
    }
  }
  throw Error(ErrorKind::zero_search,
              "quarter-disk count: contour too close to a zero");
}

ZeroCatalog find_zeros(const ComplexFunction& g, double search_radius,
                       const ZeroSearchOptions& options) {
  if (!(search_radius > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "search radius must be positive");
  }
  ZeroCatalog cat;
  cat.search_radius = search_radius;
  const double e = options.axis_band;
  Searcher(g, search_radius, options)
      .run({e, search_radius, e, search_radius}, cat.first_quadrant,
           cat.rejected_on_axis);
  if (options.fourth_quadrant) {
    Searcher(g, search_radius, options)
        .run({e, search_radius, -search_radius, -e}, cat.fourth_quadrant,
             cat.rejected_on_axis);
  }
  sort_by_modulus(cat.first_quadrant);
  sort_by_modulus(cat.fourth_quadrant);
  return cat;
}

ZeroCatalog find_zeros(const ForwardModel& model, double search_radius,
                       ZeroSearchOptions options) {
  const auto& p = model.profile();
  options.type_width = p.ell() + 2.0 * p.endpoints().r_ell + 1.0;
  return find_zeros([&model](cplx k) { return model.G(k); }, search_radius,
                    options);
}

DensityRow zero_density(const ZeroCatalog& catalog, double rho) {
  if (!(rho > 0.0) || rho > catalog.search_radius - 1.0 + 1e-12) {
    throw Error(ErrorKind::invalid_argument,
                "zero density: rho must lie in (0, search_radius - 1]");
  }
  const int n = catalog.n_plus(rho);
  return {rho, n, catalog.n_plus(rho + 1.0) - n, n / rho};
}

std::vector<DensityRow> zero_density_table(const ZeroCatalog& catalog) {
  std::vector<DensityRow> rows;
  for (int rho = 1; rho <= catalog.search_radius - 1.0 + 1e-12; ++rho) {
    rows.push_back(zero_density(catalog, rho));
  }
  return rows;
}

HadamardFactor::HadamardFactor(ZeroCatalog catalog)
    : catalog_(std::move(catalog)) {}

cplx HadamardFactor::log_eval(cplx k) const {
  constexpr cplx I(0.0, 1.0);
  cplx sum = std::log(-I * k);
  auto add = [&](const std::vector<Zero>& zs) {
    for (const auto& z : zs) {
      const cplx a = k / z.k;
      const cplx b = k / std::conj(z.k);
      sum += static_cast<double>(z.multiplicity) *
             (std::log(1.0 - a) + a + std::log(1.0 + b) - b);
    }
  };
  add(catalog_.fourth_quadrant);
  add(catalog_.first_quadrant);
  return sum;
}

cplx HadamardFactor::eval(cplx k) const {
  if (k == cplx(0.0)) return 0.0;
  constexpr cplx I(0.0, 1.0);
  cplx prod = -I * k;
  auto mul = [&](const std::vector<Zero>& zs) {
    for (const auto& z : zs) {
      const cplx a = k / z.k;
      const cplx b = k / std::conj(z.k);
      const cplx f = (1.0 - a) * std::exp(a) * (1.0 + b) * std::exp(-b);
      for (int m = 0; m < z.multiplicity; ++m) prod *= f;
    }
  };
  mul(catalog_.fourth_quadrant);
  mul(catalog_.first_quadrant);
  return prod;
}

double HadamardFactor::log_abs_imag(double kappa) const {
  // Each pair contributes ln(|k_j - i kappa|^2 / |k_j|^2) + 2 kappa Im k_j / |k_j|^2.
  double sum = std::log(std::abs(kappa));
  auto add = [&](const std::vector<Zero>& zs) {
    for (const auto& z : zs) {
      const double a = z.k.real(), b = z.k.imag();
      const double m2 = a * a + b * b;
      sum += z.multiplicity *
             (std::log((a * a + (b - kappa) * (b - kappa)) / m2) +
              2.0 * kappa * b / m2);
    }
  };
  add(catalog_.fourth_quadrant);
  add(catalog_.first_quadrant);
  return sum;
}

double HadamardFactor::log_abs(double k) const { return log_eval(k).real(); }

HadamardFactor build_E(const ZeroCatalog& catalog) {
  if (catalog.first_quadrant.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "build_E: catalog has no first-quadrant zeros");
  }
  return HadamardFactor(catalog);
}

}  // namespace vtract
