#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support/gen.hpp"
#include "vtract/forward.hpp"
#include "vtract/inversion.hpp"

using namespace vtract;
using vtract::testing::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

double sup_rel_error(const InversionResult& res, const RadiusProfile& truth) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < res.x.size(); ++i) {
    const double t = truth.radius(res.x[i]);
    worst = std::max(worst, std::abs(res.r[i] - t) / t);
  }
  return worst;
}

Eigen::VectorXd pressure_grid() {
  return Eigen::VectorXd::LinSpaced(4000, 0.01, 40.0);
}

void check_constants(const RecoveredConstants& c, const RadiusProfile& p,
                     double tol) {
  const auto& e = p.endpoints();
  CHECK(c.ell == doctest::Approx(p.ell()).epsilon(tol));
  CHECK(c.r_ell == doctest::Approx(e.r_ell).epsilon(tol));
  CHECK(c.r0 == doctest::Approx(e.r0).epsilon(tol));
}

}  // namespace

TEST_CASE("data kind names and detection") {
  for (DataKind k : {DataKind::pressure, DataKind::magnitude, DataKind::length_zeros,
                     DataKind::radius_zeros, DataKind::length_product,
                     DataKind::radius_product}) {
    CHECK(data_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(data_kind_from_string("phase"), Error);
  CHECK(detect_kind(true, false, false, false, false, false) == DataKind::pressure);
  CHECK(detect_kind(false, true, true, false, false, false) == DataKind::magnitude);
  CHECK(detect_kind(false, false, true, true, true, false) == DataKind::length_zeros);
  CHECK(detect_kind(false, false, false, true, false, true) == DataKind::radius_zeros);
  try {
    detect_kind(false, false, true, false, true, false);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("--poles1") != std::string::npos);
  }
}

TEST_CASE("data set validation") {
  DataSet ds;
  ds.kind = DataKind::length_zeros;
  ds.zeros.first_quadrant.push_back({cplx(1.0, 0.1), 1});
  CHECK_THROWS_AS(ds.validate(), Error);
  ds.ell = 17.0;
  CHECK_NOTHROW(ds.validate());
  ds.zeros.first_quadrant.push_back({cplx(1.0, -0.1), 1});
  CHECK_THROWS_AS(ds.validate(), Error);
  ds.zeros.first_quadrant.clear();
  CHECK_THROWS_AS(ds.validate(), Error);

  DataSet curve;
  curve.kind = DataKind::pressure;
  curve.curve.k = Eigen::VectorXd::LinSpaced(10, 1.0, 0.1);
  curve.curve.values = Eigen::VectorXcd::Ones(10);
  CHECK_THROWS_AS(curve.validate(), Error);
}

TEST_CASE("diagnostics record") {
  Diagnostics d;
  d.put("a", 1.25);
  d.put("b", "none");
  d.put("a", 2.5);
  CHECK(d.number("a").value() == 2.5);
  CHECK(d.get("b").value() == "none");
  CHECK_FALSE(d.number("b").has_value());
  CHECK_FALSE(d.get("c").has_value());
  CHECK(d.items().size() == 2);
  CHECK(d.str() == "a=2.5\nb=none\n");
}

TEST_CASE("graded grid steps") {
  const auto k = graded_k_grid(25.0);
  CHECK(k[0] > 0.0);
  CHECK(k[k.size() - 1] == doctest::Approx(25.0));
  for (Eigen::Index i = 1; i < k.size(); ++i) {
    const double h = k[i] - k[i - 1];
    REQUIRE(h > 0.0);
    if (k[i] <= 0.2) CHECK(h == doctest::Approx(1e-4).epsilon(1e-6));
    if (k[i - 1] >= 1.0) CHECK(h == doctest::Approx(0.01).epsilon(1e-6));
  }
}

TEST_CASE("asymptotic fit recovers the constants from exact r0 G") {
  const auto p = vtract::testing::quadratic_example();
  ForwardModel m(p);
  const auto& e = p.endpoints();
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(3500, 0.01, 35.0);
  const Eigen::VectorXcd G = e.r0 * sweep(m, Quantity::G, k, 1).values;
  const auto fit = fit_asymptotics(k, G, e.r_ell, std::nullopt);
  CHECK(fit.ell == doctest::Approx(17.0).epsilon(1e-4));
  CHECK(fit.amplitude == doctest::Approx(e.r0).epsilon(1e-3));
  CHECK(fit.gamma == doctest::Approx(p.gamma()).epsilon(0.02));
  CHECK(fit.r_ell_prime == doctest::Approx(e.r_ell_prime).epsilon(0.02));

  const auto [ratio, gamma] = sample_asymptotes(
      [&](double kk) { return m.G(kk); }, 17.0, e.r_ell, 10.0, 30.0);
  CHECK(gamma == doctest::Approx(p.gamma()).epsilon(0.05));
  CHECK(ratio == doctest::Approx(e.r_ell_prime / e.r_ell - p.gamma()).epsilon(0.05));
}

TEST_CASE("asymptotic model tracks G at large |k|") {
  const auto p = vtract::testing::quadratic_example();
  ForwardModel m(p);
  const auto& e = p.endpoints();
  for (double k : {25.0, 31.3, 40.0}) {
    const cplx a = asymptotic_G(k, 17.0, e.r_ell, e.r_ell_prime, p.gamma());
    CHECK(std::abs(a - m.G(k)) < 1e-5 * std::abs(m.G(k)));
  }
}

TEST_CASE("property: phi curves and Jost function from exact G") {
  Gen gen(111);
  for (int trial = 0; trial < 6; ++trial) {
    const auto p = gen.profile();
    ForwardModel m(p);
    const auto& e = p.endpoints();
    RecoveredConstants c;
    c.r0 = e.r0;
    c.r_ell = e.r_ell;
    c.r_ell_prime = e.r_ell_prime;
    c.ell = p.ell();
    c.gamma = p.gamma();
    const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(600, 0.05, 30.0);
    const auto curves = phi_at_ell(k, sweep(m, Quantity::G, k, 1).values, c);
    REQUIRE(curves.k.size() == k.size() + 1);
    CHECK(curves.k[0] == 0.0);
    CHECK(curves.phi[0] == doctest::Approx(e.r_ell / e.r0));
    for (int j = 0; j < 5; ++j) {
      const Eigen::Index i = gen.integer(1, static_cast<int>(k.size()));
      const State ref = m.phi_ell(curves.k[i]);
      CHECK(std::abs(curves.phi[i] - ref[0].real()) < 1e-8 * (1.0 + std::abs(ref[0])));
      CHECK(std::abs(curves.phi_prime[i] - ref[1].real()) <
            1e-8 * (1.0 + std::abs(ref[1])));
    }
    const JostInterpolant F(curves, c.ell);
    const double kk = gen.uniform(0.5, 29.0);
    CHECK(std::abs(F(kk) - m.F(kk)) < 1e-4 * std::abs(m.F(kk)));
    const auto Fs = jost_from_phi(curves, c.ell);
    CHECK(std::abs(Fs.values[10] - m.F(Fs.k[10])) < 1e-8 * std::abs(m.F(Fs.k[10])));

    const cplx kc = gen.complex(0.3, 10.0, -1.0, 1.0);
    const cplx Fc = jost_from_G([&](cplx q) { return m.G(q); }, kc, c);
    CHECK(std::abs(Fc - m.F(kc)) < 1e-7 * std::abs(m.F(kc)));
  }
}

TEST_CASE("near-zero continuation reaches the imaginary axis") {
  const auto p = vtract::testing::narrowing_example();
  ForwardModel m(p);
  const auto& e = p.endpoints();
  RecoveredConstants c{0.0, e.r0, e.r_ell, e.r_ell_prime, p.gamma(), p.ell()};
  const Eigen::VectorXd k = graded_k_grid(5.0);
  const auto curves = phi_at_ell(k, sweep(m, Quantity::G, k, 1).values, c);
  const JostNearZero F0(curves, p.ell(), 6.0 / p.ell());
  CHECK(F0.rms() < 1e-6);
  for (double kappa : {0.01, 0.02, 0.1}) {
    const cplx ref = m.F(cplx(0.0, kappa));
    CHECK(std::abs(F0(cplx(0.0, kappa)) - ref) < 1e-5);
  }
  // Continuation off the real axis amplifies the fit residual toward k_fit.
  CHECK(std::abs(F0(cplx(0.0, 0.3)) - m.F(cplx(0.0, 0.3))) < 2e-3);
}

TEST_CASE("pressure route: quadratic and narrowing tubes") {
  for (const auto& p : {vtract::testing::quadratic_example(),
                        vtract::testing::narrowing_example()}) {
    ForwardModel m(p);
    const auto ds = make_dataset(m, DataKind::pressure, pressure_grid(), 10.0, 1);
    const auto res = invert_pipeline(ds);
    CHECK(sup_rel_error(res, p) < 0.01);
    check_constants(res.constants, p, 0.005);
    CHECK(res.constants.r_ell_prime ==
          doctest::Approx(p.endpoints().r_ell_prime).epsilon(0.05));
    CHECK(res.bound.has_value() == (p.endpoints().r_ell_prime < 0.0));
    CHECK(res.diagnostics.get("data_kind").value() == "pressure");
    CHECK(res.diagnostics.get("bound_state_branch").has_value());
    if (res.bound) {
      CHECK(res.bound->kappa1 == doctest::Approx(0.02).epsilon(0.05));
      CHECK(res.bound->g1_squared > 0.0);
    }
  }
}

TEST_CASE("magnitude route on the graded grid") {
  const auto p = vtract::testing::quadratic_example();
  ForwardModel m(p);
  const auto ds = make_dataset(m, DataKind::magnitude, graded_k_grid(40.0), 10.0, 1);
  const auto res = invert_pipeline(ds);
  CHECK(sup_rel_error(res, p) < 0.01);
  check_constants(res.constants, p, 0.01);
}

TEST_CASE("zero-set routes on one catalog") {
  const auto p = vtract::testing::quadratic_example();
  ForwardModel m(p);
  DataSet base = make_dataset(m, DataKind::length_zeros, Eigen::VectorXd(), 10.0, 1);
  REQUIRE(base.zeros.count_first(10.0) == 57);
  for (DataKind kind : {DataKind::length_zeros, DataKind::radius_zeros,
                        DataKind::length_product, DataKind::radius_product}) {
    DataSet ds = base;
    ds.kind = kind;
    const bool by_length =
        kind == DataKind::length_zeros || kind == DataKind::length_product;
    if (!by_length) {
      ds.ell.reset();
      ds.r_ell = p.endpoints().r_ell;
    }
    const auto res = invert_pipeline(ds);
    CHECK(sup_rel_error(res, p) < 0.01);
    check_constants(res.constants, p, 0.01);
  }
}

TEST_CASE("constants from a zero catalog") {
  const auto p = vtract::testing::uniform_example();
  ForwardModel m(p);
  const auto cat = find_zeros(m, 10.0);
  const auto pc = recover_constants(cat, 17.0, std::nullopt);
  CHECK(pc.constants.r_ell == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(pc.constants.r_ell_prime) < 0.01);
  CHECK(pc.tail_zeros > 0);
  const cplx k(3.3, 0.0);
  CHECK(std::abs(pc.G_scaled(k) - m.G(k)) < 0.01 * std::abs(m.G(k)));
  CHECK_THROWS_AS(recover_constants(cat, std::nullopt, std::nullopt), Error);
}

TEST_CASE("failures name their pipeline stage") {
  const auto p = vtract::testing::quadratic_example();
  ForwardModel m(p);
  // Small-k window with no samples: the data cannot be normalized.
  const auto ds = make_dataset(m, DataKind::pressure,
                               Eigen::VectorXd::LinSpaced(500, 1.0, 40.0), 10.0, 1);
  try {
    invert_pipeline(ds);
    FAIL("expected a pipeline error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "normalize");
    CHECK(e.kind() == ErrorKind::pipeline);
    CHECK(std::string(e.what()).find("normalize") != std::string::npos);
  }

  // A GL grid below the minimum fails after normalization, with the
  // constants already in the partial record.
  InversionOptions opt;
  opt.grid_n = 16;
  try {
    invert_pipeline(make_dataset(m, DataKind::pressure, pressure_grid(), 10.0, 1), opt);
    FAIL("expected a pipeline error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "gl_solve");
    CHECK(e.diagnostics().number("ell").has_value());
  }
}
