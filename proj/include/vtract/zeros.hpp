#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "vtract/error.hpp"

namespace vtract {

class ForwardModel;

using ComplexFunction = std::function<cplx(cplx)>;

struct Zero {
  cplx k;
  int multiplicity = 1;
};

struct ZeroCatalog {
  std::vector<Zero> first_quadrant;   // Re > 0, Im > 0, by modulus
  std::vector<Zero> fourth_quadrant;  // Re > 0, Im < 0, by modulus
  double search_radius = 0.0;
  int rejected_on_axis = 0;

  // Zeros with |k| < rho, counted with multiplicity.
  int count_first(double rho) const;
  int count_fourth(double rho) const;
  // Both quadrants: zeros with positive real part and |k| < rho.
  int n_plus(double rho) const { return count_first(rho) + count_fourth(rho); }
};

struct Box {
  double re_lo, re_hi, im_lo, im_hi;
};

struct ZeroSearchOptions {
  // Exponential-type bound of G; sets the base step of the phase walk.
  double type_width = 20.0;
  double axis_band = 1e-6;
  // Single-zero boxes are handed to Newton once their longer side is below
  // this; subdivision stops at `min_box`.
  double newton_box = 0.25;
  double min_box = 1e-7;
  double residual_tol = 1e-10;  // |G| < tol (1 + |k|)
  int max_retries = 6;
  bool fourth_quadrant = true;
};

// Winding number of g around the box boundary (zeros inside, with
// multiplicity). Near-zero boundary values trigger a perturbed retry.
int count_zeros_in_box(const ComplexFunction& g, const Box& box,
                       const ZeroSearchOptions& options = {});

// Same for the quarter disk |k| < rho in quadrant 1 or 4, kept clear of the
// axes by the axis band.
int count_zeros_in_quarter_disk(const ComplexFunction& g, double rho,
                                int quadrant,
                                const ZeroSearchOptions& options = {});

ZeroCatalog find_zeros(const ComplexFunction& g, double search_radius,
                       const ZeroSearchOptions& options = {});
ZeroCatalog find_zeros(const ForwardModel& model, double search_radius,
                       ZeroSearchOptions options = {});

struct DensityRow {
  double rho;
  int n_plus;
  int window;    // n_+(rho + 1) - n_+(rho)
  double ratio;  // n_+(rho) / rho
};

// Rows for rho = 1, 2, ... up to search_radius - 1.
std::vector<DensityRow> zero_density_table(const ZeroCatalog& catalog);
DensityRow zero_density(const ZeroCatalog& catalog, double rho);

/// Genus-one canonical product over the catalogued zeros,
///   E(k) = -ik E^-(k) E^+(k),
/// each factor pairing k_j with its mirror image -k_j^*.
class HadamardFactor {
 public:
  explicit HadamardFactor(ZeroCatalog catalog);

  const ZeroCatalog& catalog() const { return catalog_; }

  cplx operator()(cplx k) const { return eval(k); }
  cplx eval(cplx k) const;
  cplx log_eval(cplx k) const;  // branch of log E up to 2 pi i
  double log_abs_imag(double kappa) const;  // ln |E(i kappa)|
  double log_abs(double k) const;           // ln |E(k)| for real k

 private:
  ZeroCatalog catalog_;
};

HadamardFactor build_E(const ZeroCatalog& catalog);

}  // namespace vtract
