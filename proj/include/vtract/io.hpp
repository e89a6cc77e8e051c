#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vtract/forward.hpp"
#include "vtract/inversion.hpp"
#include "vtract/profile.hpp"
#include "vtract/zeros.hpp"

namespace vtract {

inline constexpr const char* kProfileFormat = "profile v1";

// Profile file:
//   profile v1
//   ell <float>
//   family uniform|linear|quadratic|sampled
//   r0 <float>
//   r0p <float>          (optional)
//   n <int>              (sampled only, then n lines "x r")
RadiusProfile read_profile(std::istream& in);
RadiusProfile read_profile_file(const std::string& path);
void write_profile(std::ostream& out, const RadiusProfile& profile);
void write_profile_file(const std::string& path, const RadiusProfile& profile);

// Spectrum CSV: header `k,re,im`. Magnitude CSV: header `k,abs`; the modulus
// is returned in the real part of `values`.
SpectralCurve read_spectrum(std::istream& in);
SpectralCurve read_spectrum_file(const std::string& path);
SpectralCurve read_magnitude(std::istream& in);
SpectralCurve read_magnitude_file(const std::string& path);
void write_spectrum(std::ostream& out, const SpectralCurve& curve);
void write_magnitude(std::ostream& out, const SpectralCurve& curve);
void write_curve_file(const std::string& path, const SpectralCurve& curve,
                      bool magnitude);

// Zeros CSV: header `re,im,mult`; first-quadrant rows, then a `# quadrant-4`
// line and the fourth-quadrant rows. `# search_radius=<float>` records the
// radius of the search. Rows go to the quadrant given by the sign of Im k, so
// the marker may be omitted; a first-quadrant row after it is an error.
ZeroCatalog read_zeros(std::istream& in);
ZeroCatalog read_zeros_file(const std::string& path);
void write_zeros(std::ostream& out, const ZeroCatalog& catalog);
void write_zeros_file(const std::string& path, const ZeroCatalog& catalog);

// Density report CSV `rho,n_plus,window,ratio,limit[,mirrored]`, one row per
// rho = 1, 2, ...; `mirrored` (optional) holds the independent count of
// second-quadrant zeros per row.
void write_density_report(std::ostream& out, const ZeroCatalog& catalog,
                          double limit, const std::vector<int>& mirrored = {});

void write_diagnostics_file(const std::string& path, const Diagnostics& diag);

// 17 significant digits: parses back to the same double.
std::string format_double(double v);

}  // namespace vtract
