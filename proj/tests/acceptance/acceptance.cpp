// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is the number of failures.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

#include <Eigen/QR>

#include "support/gen.hpp"
#include "vtract/forward.hpp"
#include "vtract/gelfand_levitan.hpp"
#include "vtract/impedance.hpp"
#include "vtract/inversion.hpp"
#include "vtract/oracles.hpp"
#include "vtract/schrodinger.hpp"
#include "vtract/zeros.hpp"

using namespace vtract;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Least-squares coefficients of y against the columns of M.
Eigen::VectorXd lsq(const Eigen::MatrixXd& M, const Eigen::VectorXd& y) {
  return M.colPivHouseholderQr().solve(y);
}

double slope_of(const std::function<double(double)>& f, double lo, double hi) {
  const int n = 101;
  Eigen::MatrixXd M(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double t = lo + (hi - lo) * i / (n - 1);
    M(i, 0) = 1.0;
    M(i, 1) = t;
    y[i] = f(t);
  }
  return lsq(M, y)[1];
}

Outcome zero_counts(const ZeroCatalog& cat) {
  const int a = cat.count_first(2.0), b = cat.count_first(5.0), c = cat.count_first(10.0);
  return {a == 11 && b == 28 && c == 57,
          "first quadrant |k|<2: " + std::to_string(a) + " (11), |k|<5: " +
              std::to_string(b) + " (28), |k|<10: " + std::to_string(c) + " (57)"};
}

Outcome zero_density_check(const ZeroCatalog& cat, const RadiusProfile& p) {
  const double limit = (p.endpoints().r_ell + p.ell()) / kPi;
  const double ratio = cat.n_plus(10.0) / 10.0;
  std::string windows;
  for (const auto& row : zero_density_table(cat)) {
    windows += std::to_string(row.window) + " ";
  }
  const double dev = std::abs(ratio - limit) / limit;
  return {dev < 0.10, fmt("n+(10)/10 = %.4f", ratio) + fmt(" vs %.4f", limit) +
                          fmt(" (%.1f%% off, tol 10%%); unit windows: ", 100 * dev) +
                          windows};
}

Outcome oracle_agreement() {
  const auto u = vtract::testing::uniform_example();
  const auto q = vtract::testing::quadratic_example();
  const auto l = RadiusProfile::linear(0.8, 0.03, 17.0);
  ForwardModel mu(u), mq(q), ml(l);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double k = 0.5 + 19.5 * i / 199.0;
    const cplx gu = oracle_G_uniform(k, 1.0, 17.0);
    const cplx gq = oracle_G_quadratic(k, q.r0_param(), q.r0p_param(), 17.0);
    const cplx gl = oracle_G_linear(k, 0.8, 0.03, 17.0);
    for (auto [a, b] : {std::pair{mu.G(k), gu}, {mq.G(k), gq}, {ml.G(k), gl},
                        {oracle_G_jost_matrix(k, u), gu},
                        {oracle_G_jost_matrix(k, q), gq},
                        {oracle_G_jost_matrix(k, l), gl}}) {
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
  }
  return {worst < 1e-6, fmt("max relative disagreement %.2e (tol 1e-6)", worst)};
}

Outcome impedance_properties() {
  vtract::testing::Gen gen(2024);
  const ImpedanceModel m(1.0783511527192506);
  double sym = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx k = gen.complex(-20.0, 20.0, -3.0, 3.0);
    sym = std::max(sym, std::abs(z_eval(-std::conj(k), m) - std::conj(z_eval(k, m))));
  }
  bool positive = true;
  for (int i = 1; i <= 4000; ++i) {
    const cplx z = z_eval(0.01 * i, m);
    positive = positive && z.real() > 0.0 && z.imag() > 0.0;
  }
  double imag_axis = 0.0;
  for (int i = -100; i <= 100; ++i) {
    const double kappa = 0.05 * i;
    imag_axis = std::max(imag_axis, std::abs(z_eval(cplx(0.0, kappa), m) -
                                             oracle_z_imaginary(kappa, m.r_ell)));
  }
  bool large = true;
  for (int i = 0; i <= 800; ++i) {
    const double k = 20.0 + 0.1 * i, kr = k * m.r_ell;
    large = large && std::abs(z_eval(k, m) - 1.0 - 2.0 * kI / (kPi * kr)) <
                         2.0 * std::pow(kr, -1.5);
  }
  const bool ok = sym < 1e-12 && positive && imag_axis < 1e-8 && large;
  return {ok, fmt("symmetry %.1e, ", sym) + (positive ? "Re,Im>0 on (0,40], " : "sign FAIL, ") +
                  fmt("imaginary axis %.1e, ", imag_axis) +
                  (large ? "large-k bound holds" : "large-k bound FAIL")};
}

Outcome g_structure() {
  std::string detail;
  bool ok = true;
  for (const auto& p : {vtract::testing::uniform_example(),
                        vtract::testing::quadratic_example()}) {
    ForwardModel m(p);
    const auto& e = p.endpoints();
    const double h = 1e-6;
    const cplx slope = (m.G(h) - m.G(-h)) / (2.0 * h);
    const double slope_err =
        std::abs(slope + kI * e.r_ell / e.r0) / (e.r_ell / e.r0);
    bool sign = true;
    for (int i = -100; i <= 100; ++i) {
      if (i == 0) continue;
      const double kappa = 0.05 * i;
      const cplx g = m.G(cplx(0.0, kappa));
      sign = sign && (g * kappa).real() > 0.0 && std::abs(g.imag()) < 1e-8 * std::abs(g);
    }
    const double ratio = std::abs(m.G(40.0)) / 40.0;
    const double up = slope_of(
        [&](double kap) { return std::log(m.G(cplx(0.0, kap)).real()); }, 3.0, 8.0);
    const double down = slope_of(
        [&](double kap) { return std::log(-m.G(cplx(0.0, -kap)).real()); }, 3.0, 8.0);
    const double up_err = std::abs(up - (2.0 * e.r_ell + p.ell())) / (2.0 * e.r_ell + p.ell());
    const double down_err = std::abs(down - p.ell()) / p.ell();
    const bool here = std::abs(m.G(0.0)) == 0.0 && slope_err < 1e-4 && sign &&
                      ratio > 0.95 && ratio < 1.05 && up_err < 0.03 && down_err < 0.03;
    ok = ok && here;
    detail += to_string(p.family()) + fmt(": G'(0) err %.1e", slope_err) +
              (sign ? ", kG(ik)>0" : ", sign FAIL") + fmt(", |G(40)|/40 %.4f", ratio) +
              fmt(", slopes off %.2f%%", 100 * up_err) + fmt("/%.2f%%; ", 100 * down_err);
  }
  return {ok, detail};
}

Outcome pressure_limits() {
  const auto p = vtract::testing::quadratic_example();
  ForwardModel m(p);
  const auto& e = p.endpoints();
  const double cmu = m.constants().c * m.constants().mu;
  // The quarter-wave resonance k ~ pi/(2 ell) sits inside [0.01, 0.1], so |P|/k
  // is far from flat there. k^2/|P|^2 is even, smooth and pole-free on the real
  // axis; fit it by a quartic in k^2 whose intercept is 1/s^2.
  const int n = 91, degree = 4;
  Eigen::MatrixXd A(n, degree + 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double k = 0.01 + 0.001 * i;
    double t = 1.0;
    for (int j = 0; j <= degree; ++j, t *= k * k) A(i, j) = t;
    const double v = std::abs(m.lip_pressure(k)) / k;
    y[i] = 1.0 / (v * v);
  }
  const double slope = 1.0 / std::sqrt(lsq(A, y)[0]);
  const double slope_true = 8.0 * cmu / (3.0 * kPi * kPi * e.r_ell);
  // |P| = a + b/k on [30, 40].
  const int np = 1001;
  Eigen::MatrixXd B(np, 2);
  Eigen::VectorXd v(np);
  for (int i = 0; i < np; ++i) {
    const double k = 30.0 + 0.01 * i;
    B(i, 0) = 1.0;
    B(i, 1) = 1.0 / k;
    v[i] = std::abs(m.lip_pressure(k));
  }
  const double plateau = lsq(B, v)[0];
  const double plateau_true = cmu / (kPi * e.r0 * e.r_ell);
  const double se = std::abs(slope - slope_true) / slope_true;
  const double pe = std::abs(plateau - plateau_true) / plateau_true;
  return {se < 0.01 && pe < 0.03,
          fmt("slope off %.3f%% (tol 1%%), ", 100 * se) +
              fmt("plateau off %.3f%% (tol 3%%)", 100 * pe)};
}

Outcome roundtrip() {
  std::string detail;
  bool ok = true;
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(4000, 0.01, 40.0);
  for (const auto& [p, tol] : {std::pair{vtract::testing::uniform_example(), 0.01},
                               {vtract::testing::quadratic_example(), 0.03}}) {
    ForwardModel m(p);
    const auto res = invert_pipeline(make_dataset(m, DataKind::pressure, k, 10.0, 1));
    double sup = 0.0;
    for (Eigen::Index i = 0; i < res.x.size(); ++i) {
      const double t = p.radius(std::min(res.x[i], p.ell()));
      sup = std::max(sup, std::abs(res.r[i] - t) / t);
    }
    const auto& e = p.endpoints();
    const auto& c = res.constants;
    const double ell_err = std::abs(c.ell - p.ell()) / p.ell();
    const double rl_err = std::abs(c.r_ell - e.r_ell) / e.r_ell;
    // r_ell' = 0 for the uniform tube: measured against the scale r_ell/ell.
    const double rlp_err = std::abs(c.r_ell_prime - e.r_ell_prime) /
                           std::max(std::abs(e.r_ell_prime), e.r_ell / p.ell());
    const bool here = sup < tol && ell_err < 0.01 && rl_err < 0.02 && rlp_err < 0.05;
    ok = ok && here;
    detail += to_string(p.family()) + fmt(": sup %.2e", sup) + fmt(" (tol %.0e)", tol) +
              fmt(", ell %.1e", ell_err) + fmt(", r_ell %.1e", rl_err) +
              fmt(", r_ell' %.1e; ", rlp_err);
  }
  return {ok, detail};
}

Outcome gl_trivial() {
  GLKernel kernel([](double k) { return cplx(k); }, 17.0);
  const GLState st = gl_solve(kernel, 256);
  const auto rec = recover_profile(st, 1.0);
  const double a = st.A.cwiseAbs().maxCoeff();
  const double r = (rec.r.array() - 1.0).abs().maxCoeff();
  return {a == 0.0 && r == 0.0, fmt("max|A| = %.1e", a) + fmt(", max|r - r0| = %.1e", r)};
}

Outcome bound_state_dichotomy() {
  std::string detail;
  bool ok = true;
  const double kappa_max = 2.0;
  for (const auto& p : {vtract::testing::narrowing_example(),
                        vtract::testing::uniform_example(),
                        vtract::testing::quadratic_example()}) {
    ForwardModel m(p);
    JostHandle F = [&](cplx k) { return m.F(k); };
    const int changes = count_imaginary_sign_changes(F, kappa_max, 2000);
    const bool narrowing = p.endpoints().r_ell_prime < 0.0;
    bool here = changes == (narrowing ? 1 : 0);
    detail += to_string(p.family()) + ": " + std::to_string(changes) + " sign change(s)";
    if (narrowing) {
      const auto b = bound_state(F, p.endpoints().r_ell_prime, p.ell());
      here = here && b && b->g1_squared > 0.0;
      if (b) detail += fmt(", kappa1 %.5f", b->kappa1) + fmt(", g1^2 %.5f", b->g1_squared);
    }
    detail += "; ";
    ok = ok && here;
  }
  return {ok, detail};
}

Outcome wronskian_gauge() {
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(41, 0.0, 17.0);
  Eigen::VectorXd r(41);
  for (int i = 0; i < 41; ++i) r[i] = 1.0 + 0.3 * std::sin(0.4 * x[i]);
  const RadiusProfile profiles[] = {
      vtract::testing::uniform_example(), vtract::testing::narrowing_example(),
      vtract::testing::quadratic_example(), RadiusProfile::sampled(x, r)};
  double worst = 0.0;
  for (const auto& p : profiles) {
    for (int i = -40; i <= 40; ++i) {
      for (double im : {0.0, 0.25, -0.25}) {
        const cplx k(0.5 * i, im);
        if (std::abs(k) > 20.0) continue;
        const Eigen::VectorXcd w = wronskian(regular_solution(k, p), sine_solution(k, p));
        worst = std::max(worst, (w.array() - 1.0).abs().maxCoeff());
      }
    }
  }
  return {worst < 1e-8, fmt("max drift %.2e over four families (tol 1e-8)", worst)};
}

}  // namespace

int main() {
  const auto quad = vtract::testing::quadratic_example();
  const ZeroCatalog cat = find_zeros(ForwardModel(quad), 11.0);

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"zero counts", [&] { return zero_counts(cat); }},
      {"zero density", [&] { return zero_density_check(cat, quad); }},
      {"closed-form oracles", oracle_agreement},
      {"impedance properties", impedance_properties},
      {"structure of G", g_structure},
      {"pressure limits", pressure_limits},
      {"pressure roundtrip", roundtrip},
      {"GL trivial case", gl_trivial},
      {"bound-state dichotomy", bound_state_dichotomy},
      {"Wronskian gauge", wronskian_gauge},
  };
  int failures = 0, i = 0;
  for (const auto& c : criteria) {
    ++i;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %-22s %s\n", o.pass ? "PASS" : "FAIL", i, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", i - failures, i);
  return failures;
}
