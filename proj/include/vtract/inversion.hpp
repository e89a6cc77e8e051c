#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vtract/constants.hpp"
#include "vtract/forward.hpp"
#include "vtract/gelfand_levitan.hpp"
#include "vtract/profile.hpp"
#include "vtract/spline.hpp"
#include "vtract/zeros.hpp"

namespace vtract {

// The six equivalent inputs of the inverse problem.
enum class DataKind {
  pressure,        // complex lip pressure P(k, ell) on a real grid
  magnitude,       // |P(k, ell)| plus the fourth-quadrant zeros of G
  length_zeros,    // ell plus both zero sets
  radius_zeros,    // r_ell plus both zero sets
  length_product,  // ell plus the canonical product E
  radius_product,  // r_ell plus the canonical product E
};

std::string to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& name);

// Picks the data kind implied by which inputs are present; throws a parse
// error listing the minimal combinations otherwise.
DataKind detect_kind(bool spectrum, bool magnitude, bool poles4, bool poles1,
                     bool ell, bool r_ell);

struct DataSet {
  DataKind kind = DataKind::pressure;
  SpectralCurve curve;  // pressure: P; magnitude: |P| in the real part
  ZeroCatalog zeros;    // the product kinds carry E through its zeros
  std::optional<double> ell;
  std::optional<double> r_ell;

  void validate() const;
};

struct RecoveredConstants {
  double C = 0.0;
  double r0 = 0.0;
  double r_ell = 0.0;
  double r_ell_prime = 0.0;
  double gamma = 0.0;
  double ell = 0.0;
};

/// Ordered key=value record of every intermediate quantity.
class Diagnostics {
 public:
  void put(const std::string& key, double value);
  void put(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }
  std::string str() const;  // one key=value per line

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what,
                Diagnostics partial)
      : Error(ErrorKind::pipeline, "stage '" + stage + "': " + what),
        stage_(std::move(stage)),
        partial_(std::move(partial)) {}

  const std::string& stage() const { return stage_; }
  const Diagnostics& diagnostics() const { return partial_; }

 private:
  std::string stage_;
  Diagnostics partial_;
};

struct InversionOptions {
  PhysicalConstants constants;
  int grid_n = 256;
  KernelOptions kernel;

  // Small-k limit of (k/|P|)^2, an even function: polynomial in k^2.
  double small_k_lo = 0.01;
  double small_k_hi = 0.1;
  double small_k_hi_alt = 0.05;  // second window, logged
  int small_k_degree = 4;

  // Large-k plateau a + b/k of |P| (cross-check of r0).
  double plateau_lo = 30.0;
  double plateau_hi = 40.0;

  // Real-axis asymptotic fit of r0 phi(k, ell) and r0 u(k).
  double fit_k_lo = 5.0;
  double fit_k_hi = 30.0;
  double scan_k_lo = 2.0;
  double scan_k_hi = 20.0;
  double ell_scan_lo = 1.0;
  double ell_scan_hi = 60.0;
  double ell_scan_step = 0.005;

  // Zero-set routes: catalog zeros with |k| above match_band times the
  // search radius fix the constants; G is rebuilt on a graded grid to
  // product_k_max; model zeros continue the catalog to tail_k_max.
  double match_band = 0.5;
  double product_k_max = 25.0;
  double tail_k_max = 500.0;
  double kappa_lo = 3.0;
  double kappa_hi = 12.0;
  double kappa_lo_alt = 8.0;
  double kappa_hi_alt = 16.0;

  // |r_ell'| below this is treated as zero for the bound-state branch.
  double bound_state_tolerance = 1e-4;
  // Continuation of phi, phi' to the imaginary axis: k_fit = this / ell.
  double near_zero_k_ell = 6.0;
  int near_zero_degree = 8;

  int threads = 0;
};

/// Real-axis data of one route: G on a grid with every constant the route
/// determined. Routes know G only up to the factor 1/r0; the asymptotic fit
/// returns r0 as the leading amplitude of r0 phi(k, ell).
struct NormalizedData {
  Eigen::VectorXd k;
  Eigen::VectorXcd G;
  RecoveredConstants constants;
  // Complex handle for G, when the route has one (zero-set routes).
  std::function<cplx(cplx)> G_handle;
  Diagnostics diagnostics;
};

// Route-specific first half of the pipeline.
NormalizedData normalize_dataset(const DataSet& data,
                                 const InversionOptions& options = {});

// Constants from a zero set plus one of ell / r_ell. The missing constant,
// r_ell' and gamma are fitted so that the zeros of the asymptotic model sit
// on the catalog zeros of the outer band; the shift C then comes from the
// imaginary-axis growth of the canonical product completed by model zeros
// beyond the catalog and a continuum beyond those.
struct ProductConstants {
  RecoveredConstants constants;
  std::function<cplx(cplx)> G_scaled;  // r0 G = r_ell e^{iCk} E(k)
  Diagnostics diagnostics;
  int tail_zeros = 0;
};
ProductConstants recover_constants(const ZeroCatalog& catalog,
                                   std::optional<double> ell,
                                   std::optional<double> r_ell,
                                   const InversionOptions& options = {});

// Real grid resolving the narrow low resonances: step 1e-4 up to 0.2,
// 5e-4 up to 1, 0.01 up to k_max.
Eigen::VectorXd graded_k_grid(double k_max);

// Leading asymptotic model of G from the constants (exact z, one-term
// corrections in gamma); used for the zero tail.
cplx asymptotic_G(cplx k, double ell, double r_ell, double r_ell_prime,
                  double gamma);

struct AsymptoticFit {
  double amplitude = 0.0;  // r0 when the input is r0 G
  double ell = 0.0;
  double gamma = 0.0;
  double r_ell_prime = 0.0;
  double rms = 0.0;
};

// Fits r0 phi(k, ell) ~ cos(k ell)(a0 + a2/k^2) + sin(k ell)(b1/k + b3/k^3)
// and r0 u(k) with u = (r_ell'/r_ell) phi - phi'. ell is scanned and refined
// unless `ell` is given.
AsymptoticFit fit_asymptotics(const Eigen::VectorXd& k,
                              const Eigen::VectorXcd& G_scaled, double r_ell,
                              std::optional<double> ell,
                              const InversionOptions& options = {},
                              bool phase_free = false);

// Point sampling of the real-axis asymptote at k = 2 n pi/ell (gives
// r_ell'/r_ell - gamma) and k = 2 n pi/ell + pi/(2 ell) (gives gamma),
// averaged over the samples in [k_lo, k_hi].
std::pair<double, double> sample_asymptotes(
    const std::function<cplx(double)>& G, double ell, double r_ell,
    double k_lo, double k_hi);

struct PhiCurves {
  Eigen::VectorXd k;
  Eigen::VectorXd phi;        // phi(k, ell)
  Eigen::VectorXd phi_prime;  // phi'(k, ell)
};

// phi(k, ell) and phi'(k, ell) from G and z on a real grid, with the k = 0
// limits r_ell/r0 and r_ell'/r0 prepended.
PhiCurves phi_at_ell(const Eigen::VectorXd& k, const Eigen::VectorXcd& G,
                     const RecoveredConstants& constants);

// F(k) = -i e^{ik ell}(ik phi(k, ell) - phi'(k, ell)).
SpectralCurve jost_from_phi(const PhiCurves& curves, double ell);

// F between grid points, from splines of Re F and Im F.
class JostInterpolant {
 public:
  JostInterpolant(const PhiCurves& curves, double ell);
  cplx operator()(double k) const;
  double k_max() const { return k_max_; }

 private:
  CubicSpline re_;
  CubicSpline im_;
  double k_max_;
};

// F near k = 0, including the imaginary axis: phi(k, ell) and phi'(k, ell)
// are even entire functions, so least-squares polynomials in (k/k_fit)^2
// fitted on [0, k_fit] continue them to |k| <= k_fit. This is how the bound
// state is found from real-axis curves.
class JostNearZero {
 public:
  JostNearZero(const PhiCurves& curves, double ell, double k_fit,
               int degree = 8);
  cplx operator()(cplx k) const;
  double k_fit() const { return k_fit_; }
  double rms() const { return rms_; }  // fit residual, relative to max |phi|

 private:
  Eigen::VectorXd a_;  // phi coefficients
  Eigen::VectorXd b_;  // phi' coefficients
  double ell_;
  double k_fit_;
  double rms_ = 0.0;
};

// F at complex k from a handle for G, using G(k) and G(-k):
//   phi = (z(k)G(-k) - z(-k)G(k)) / (ik (z(k) + z(-k))),
//   u   = (G(k) + G(-k)) / (z(k) + z(-k)).
cplx jost_from_G(const std::function<cplx(cplx)>& G, cplx k,
                 const RecoveredConstants& constants);

struct InversionResult {
  RadiusProfile profile;
  RecoveredConstants constants;
  std::optional<BoundState> bound;
  Eigen::VectorXd x;
  Eigen::VectorXd r;
  Eigen::VectorXd q;
  Diagnostics diagnostics;
};

InversionResult invert_pipeline(const DataSet& data,
                                const InversionOptions& options = {});

// Forward-generates the data set of `kind` for a known profile.
DataSet make_dataset(const ForwardModel& model, DataKind kind,
                     const Eigen::VectorXd& k_grid, double search_radius = 10.0,
                     int threads = 0);

}  // namespace vtract
