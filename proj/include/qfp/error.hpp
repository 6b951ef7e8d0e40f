#pragma once

#include <stdexcept>
#include <string>

namespace qfp {

/// Bad input: wrong dimensions, out-of-range parameters, malformed files.
/// The command-line front end maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not meet its numerical contract.
/// The command-line front end maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fourier coefficients of an EOM drive were requested over a window that
/// drops more than the allowed spectral mass.
class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace qfp
