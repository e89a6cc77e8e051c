#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace vtract {

using cplx = std::complex<double>;

enum class ErrorKind {
  invalid_argument,
  parse,
  numeric,
  io,
  zero_search,
  pipeline,
};

// Every failure the toolkit reports goes through this type; `kind` drives
// the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when an evaluation point sits on (or numerically at) a zero of G.
class PoleError : public Error {
 public:
  PoleError(cplx k, double abs_g)
      : Error(ErrorKind::numeric,
              "pressure pole: |G(k)| = " + std::to_string(abs_g) +
                  " at k = (" + std::to_string(k.real()) + ", " +
                  std::to_string(k.imag()) + ")"),
        k_(k) {}

  cplx k() const noexcept { return k_; }

 private:
  cplx k_;
};

}  // namespace vtract
