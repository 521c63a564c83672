#pragma once

#include <stdexcept>
#include <string>

namespace lplab {

enum class ErrorCode {
  InvalidArgument,       // bad scalar/shape arguments, mismatched grids
  NonPowerOfTwo,         // grid size must be a power of two
  NoNegativeEigenvalue,  // potential has no bound state below -gap_tol
  NoConvergence,         // iterative solver exhausted its budget
  PotentialNotLocalized, // potential tail too large for shooting diagnostics
  AssumptionViolated,    // spectral assumptions (single well, non-resonant) fail
  NonFiniteSample,       // NaN/Inf detected in evolved fields
  HorizonMismatch,       // time series do not cover the requested horizon
  InsufficientSamples,   // not enough points in a fit/quadrature window
  ParseError,            // malformed config or data file
  ValidationError,       // config value out of range / unknown key
  IoError,               // filesystem failure
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace lplab
