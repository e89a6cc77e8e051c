#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "vtract/io.hpp"

namespace fs = std::filesystem;
using namespace vtract;

namespace {

constexpr const char* kVersion =
    "vtract 1.0.0 (profile v1; spectrum csv k,re,im; magnitude csv k,abs; "
    "zeros csv re,im,mult)";

struct RunConfig {
  std::string profile;
  std::string out = ".";
  double kmin = 0.01;
  double kmax = 40.0;
  int nk = 4000;
  bool graded = false;
  double search_radius = 10.0;
  int grid_n = 256;
  int threads = 0;
  double c = PhysicalConstants{}.c;
  double mu = PhysicalConstants{}.mu;
  double bound_tol = InversionOptions{}.bound_state_tolerance;
  double tail_kmax = InversionOptions{}.tail_k_max;

  std::string spectrum, magnitude, poles1, poles4, kind;
  std::optional<double> ell, r_ell;

  PhysicalConstants constants() const {
    PhysicalConstants pc;
    pc.c = c;
    pc.mu = mu;
    pc.validate();
    return pc;
  }

  InversionOptions inversion() const {
    InversionOptions o;
    o.constants = constants();
    o.grid_n = grid_n;
    o.threads = threads;
    o.bound_state_tolerance = bound_tol;
    o.tail_k_max = tail_kmax;
    return o;
  }

  Eigen::VectorXd k_grid() const {
    if (graded) return graded_k_grid(kmax);
    if (!(kmin > 0.0) || !(kmin < kmax) || nk < 2) {
      throw Error(ErrorKind::invalid_argument,
                  "k-range needs 0 < kmin < kmax and nk >= 2");
    }
    return Eigen::VectorXd::LinSpaced(nk, kmin, kmax);
  }
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::invalid_argument: return 1;
    case ErrorKind::numeric: return 2;
    case ErrorKind::io: return 3;
    case ErrorKind::zero_search: return 4;
    case ErrorKind::pipeline: return 5;
  }
  return 1;
}

fs::path out_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::io, "cannot create '" + cfg.out + "': " + ec.message());
  }
  return dir;
}

void cmd_forward(const RunConfig& cfg) {
  const ForwardModel model(read_profile_file(cfg.profile), cfg.constants());
  const Eigen::VectorXd k = cfg.k_grid();
  const fs::path dir = out_dir(cfg);
  write_curve_file((dir / "G.csv").string(),
                   sweep(model, Quantity::G, k, cfg.threads), false);
  write_curve_file((dir / "F.csv").string(),
                   sweep(model, Quantity::F, k, cfg.threads), false);
  const SpectralCurve P = sweep(model, Quantity::P_lips, k, cfg.threads);
  write_curve_file((dir / "P.csv").string(), P, false);
  write_curve_file((dir / "P_abs.csv").string(), P, true);
}

void cmd_zeros(const RunConfig& cfg) {
  const ForwardModel model(read_profile_file(cfg.profile), cfg.constants());
  const ZeroCatalog cat = find_zeros(model, cfg.search_radius);
  const fs::path dir = out_dir(cfg);
  write_zeros_file((dir / "zeros.csv").string(), cat);

  // Second-quadrant zeros, counted on their own contour: k -> conj G(-conj k)
  // is analytic and vanishes in quadrant 1 exactly at their mirror images.
  ZeroSearchOptions zo;
  const EndpointData e = model.profile().endpoints();
  zo.type_width = model.profile().ell() + 2.0 * e.r_ell + 1.0;
  auto mirror = [&model](cplx k) { return std::conj(model.G(-std::conj(k))); };
  std::vector<int> mirrored;
  for (const DensityRow& r : zero_density_table(cat)) {
    mirrored.push_back(count_zeros_in_quarter_disk(mirror, r.rho, 1, zo) +
                       count_zeros_in_quarter_disk(mirror, r.rho, 4, zo));
  }
  const double limit = (e.r_ell + model.profile().ell()) / std::numbers::pi;
  std::ofstream out(dir / "density.csv", std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write density.csv");
  write_density_report(out, cat, limit, mirrored);
  std::cout << "first_quadrant=" << cat.first_quadrant.size()
            << " fourth_quadrant=" << cat.fourth_quadrant.size()
            << " limit=" << format_double(limit) << "\n";
}

DataSet load_dataset(const RunConfig& cfg) {
  const DataKind kind =
      cfg.kind.empty()
          ? detect_kind(!cfg.spectrum.empty(), !cfg.magnitude.empty(),
                        !cfg.poles4.empty(), !cfg.poles1.empty(),
                        cfg.ell.has_value(), cfg.r_ell.has_value())
          : data_kind_from_string(cfg.kind);
  DataSet ds;
  ds.kind = kind;
  ds.ell = cfg.ell;
  ds.r_ell = cfg.r_ell;
  auto need = [](const std::string& v, const char* flag, DataKind k) {
    if (v.empty()) {
      throw Error(ErrorKind::parse, "data kind '" + to_string(k) + "' needs " + flag);
    }
  };
  switch (kind) {
    case DataKind::pressure:
      need(cfg.spectrum, "--spectrum", kind);
      ds.curve = read_spectrum_file(cfg.spectrum);
      break;
    case DataKind::magnitude:
      need(cfg.magnitude, "--magnitude", kind);
      ds.curve = read_magnitude_file(cfg.magnitude);
      if (!cfg.poles4.empty()) {
        ds.zeros.fourth_quadrant = read_zeros_file(cfg.poles4).fourth_quadrant;
      }
      break;
    default: {
      need(cfg.poles1, "--poles1", kind);
      ds.zeros = read_zeros_file(cfg.poles1);
      if (!cfg.poles4.empty()) {
        ds.zeros.fourth_quadrant = read_zeros_file(cfg.poles4).fourth_quadrant;
      }
      break;
    }
  }
  return ds;
}

void write_result(const fs::path& dir, const InversionResult& res) {
  write_profile_file((dir / "recovered.prof").string(), res.profile);
  write_diagnostics_file((dir / "diagnostics.txt").string(), res.diagnostics);
}

void cmd_invert(const RunConfig& cfg) {
  const DataSet ds = load_dataset(cfg);
  const InversionResult res = invert_pipeline(ds, cfg.inversion());
  write_result(out_dir(cfg), res);
  const RecoveredConstants& c = res.constants;
  std::cout << "kind=" << to_string(ds.kind) << " r0=" << format_double(c.r0)
            << " r_ell=" << format_double(c.r_ell)
            << " r_ell_prime=" << format_double(c.r_ell_prime)
            << " gamma=" << format_double(c.gamma)
            << " ell=" << format_double(c.ell) << "\n";
}

void cmd_roundtrip(const RunConfig& cfg) {
  const RadiusProfile truth = read_profile_file(cfg.profile);
  const ForwardModel model(truth, cfg.constants());
  const DataKind kind =
      cfg.kind.empty() ? DataKind::pressure : data_kind_from_string(cfg.kind);
  const DataSet ds =
      make_dataset(model, kind, cfg.k_grid(), cfg.search_radius, cfg.threads);
  const InversionResult res = invert_pipeline(ds, cfg.inversion());

  double sup = 0.0, l2 = 0.0, norm = 0.0;
  const Eigen::Index n = res.x.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = std::min(res.x[i], truth.ell());
    const double rt = truth.radius(xi);
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    sup = std::max(sup, std::abs(res.r[i] - rt) / rt);
    l2 += w * std::pow(res.r[i] - rt, 2);
    norm += w * rt * rt;
  }
  const EndpointData e = truth.endpoints();
  const RecoveredConstants& c = res.constants;
  Diagnostics report;
  report.put("kind", to_string(kind));
  report.put("sup_rel_error", sup);
  report.put("l2_rel_error", std::sqrt(l2 / norm));
  auto pair = [&](const std::string& name, double rec, double tru) {
    report.put(name + "_recovered", rec);
    report.put(name + "_true", tru);
    report.put(name + "_error", std::abs(rec - tru));
  };
  pair("r0", c.r0, e.r0);
  pair("r_ell", c.r_ell, e.r_ell);
  pair("r_ell_prime", c.r_ell_prime, e.r_ell_prime);
  pair("gamma", c.gamma, truth.gamma());
  pair("ell", c.ell, truth.ell());
  std::cout << report.str();
  if (cfg.out != ".") {
    const fs::path dir = out_dir(cfg);
    write_result(dir, res);
    write_diagnostics_file((dir / "roundtrip.txt").string(), report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward and inverse vocal-tract acoustics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--threads", cfg.threads, "worker threads (0 = auto)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--c", cfg.c, "sound speed, cm/s")->check(CLI::PositiveNumber);
    sub->add_option("--mu", cfg.mu, "air density, g/cm^3")->check(CLI::PositiveNumber);
  };
  auto krange = [&](CLI::App* sub) {
    sub->add_option("--kmin", cfg.kmin, "smallest k, rad/cm");
    sub->add_option("--kmax", cfg.kmax, "largest k, rad/cm");
    sub->add_option("--nk", cfg.nk, "number of k samples");
    sub->add_flag("--graded", cfg.graded,
                  "graded grid resolving the low resonances (ignores kmin, nk)");
  };
  auto tuning = [&](CLI::App* sub) {
    sub->add_option("--grid-n", cfg.grid_n, "Nystrom nodes on [0, ell]")
        ->check(CLI::Range(64, 1 << 14));
    sub->add_option("--bound-tol", cfg.bound_tol,
                    "r_ell' below -tol selects the bound-state branch");
    sub->add_option("--tail-kmax", cfg.tail_kmax,
                    "model zeros continue the catalog up to this |k|");
    sub->add_option("--kind", cfg.kind,
                    "pressure|magnitude|length-zeros|radius-zeros|"
                    "length-product|radius-product");
  };

  auto* fwd = app.add_subcommand("forward", "spectra of G, F, P and |P|");
  fwd->add_option("--profile", cfg.profile, "profile file")->required();
  common(fwd);
  krange(fwd);

  auto* zer = app.add_subcommand("zeros", "zeros of G and density report");
  zer->add_option("--profile", cfg.profile, "profile file")->required();
  zer->add_option("--radius", cfg.search_radius, "search radius")
      ->check(CLI::PositiveNumber);
  common(zer);

  auto* inv = app.add_subcommand("invert", "recover the profile from lip data");
  inv->add_option("--spectrum", cfg.spectrum, "complex lip pressure CSV");
  inv->add_option("--magnitude", cfg.magnitude, "lip pressure modulus CSV");
  inv->add_option("--poles1", cfg.poles1, "first-quadrant zeros CSV");
  inv->add_option("--poles4", cfg.poles4, "fourth-quadrant zeros CSV");
  inv->add_option("--ell", cfg.ell, "tube length, cm");
  inv->add_option("--rell", cfg.r_ell, "lip radius, cm");
  common(inv);
  tuning(inv);

  auto* rt = app.add_subcommand("roundtrip", "forward, invert and compare");
  rt->add_option("--profile", cfg.profile, "profile file")->required();
  rt->add_option("--radius", cfg.search_radius, "zero search radius")
      ->check(CLI::PositiveNumber);
  common(rt);
  krange(rt);
  tuning(rt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fwd) cmd_forward(cfg);
    if (*zer) cmd_zeros(cfg);
    if (*inv) cmd_invert(cfg);
    if (*rt) cmd_roundtrip(cfg);
  } catch (const PipelineError& e) {
    std::cerr << "error: pipeline stage '" << e.stage() << "' failed: "
              << e.what() << "\n";
    return 5;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
