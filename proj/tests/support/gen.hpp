#pragma once

// Seeded generators for the property tests. Every test draws from its own
// fixed seed so failures reproduce.

#include <cmath>
#include <cstdint>
#include <random>

#include "vtract/error.hpp"
#include "vtract/profile.hpp"

namespace vtract::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng_);
  }
  int integer(int a, int b) {
    return std::uniform_int_distribution<int>(a, b)(rng_);
  }
  cplx complex(double re_lo, double re_hi, double im_lo, double im_hi) {
    return {uniform(re_lo, re_hi), uniform(im_lo, im_hi)};
  }
  // Uniform in the annulus lo <= |k| <= hi.
  cplx annulus(double lo, double hi) {
    const double r = uniform(lo, hi);
    const double t = uniform(-3.14159265358979, 3.14159265358979);
    return std::polar(r, t);
  }

  // Closed-form profile with r >= 0.3 r0 on [0, ell].
  RadiusProfile profile() {
    const double ell = uniform(8.0, 20.0);
    const double r0 = uniform(0.4, 2.0);
    const double max_drop = 0.7 * r0 / ell;
    switch (integer(0, 2)) {
      case 0:
        return RadiusProfile::uniform(r0, ell);
      case 1:
        return RadiusProfile::linear(r0, uniform(-max_drop, 0.1), ell);
      default:
        return RadiusProfile::quadratic(r0, uniform(-max_drop, 0.1), ell);
    }
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// The two worked examples: the uniform tube and the quadratic flare.
inline RadiusProfile uniform_example() { return RadiusProfile::uniform(1.0, 17.0); }
inline RadiusProfile quadratic_example() {
  const double s5 = std::sqrt(5.0);
  return RadiusProfile::quadratic(1.0 / s5, 2.0 * (s5 - 1.0) / 85.0, 17.0);
}
// Narrowing tube with r_ell' < 0, which carries a bound state.
inline RadiusProfile narrowing_example() {
  return RadiusProfile::linear(1.0, -0.02, 17.0);
}

}  // namespace vtract::testing
