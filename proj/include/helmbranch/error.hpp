#pragma once

#include <stdexcept>
#include <string>

namespace helmbranch {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  domain,          // argument outside the mathematical domain
  unsupported,     // order or dimension not implemented
  threshold,       // parameter at or beyond the positivity threshold lambda_Q
  resolution,      // grid too coarse for the support
  shape,           // field/operator size or grid mismatch
  capacity,        // dense storage cap exceeded
  integrability,   // exponent outside the integrable range
  exponent,        // L^s exponent at or below 2N/(N-1)
  validation,      // malformed configuration or flags
  numerical,       // root bracketing / quadrature failure
  spectral,        // power iteration did not converge
  positivity,      // an iterate lost positivity
  fold,            // singular Jacobian
  convergence,     // Newton iteration cap reached
  seed,            // continuation could not be seeded
  internal
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::threshold: return "threshold";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::shape: return "shape";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::integrability: return "integrability";
    case ErrorKind::exponent: return "exponent";
    case ErrorKind::validation: return "validation";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::spectral: return "spectral";
    case ErrorKind::positivity: return "positivity";
    case ErrorKind::fold: return "fold";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::seed: return "seed";
    case ErrorKind::internal: return "internal";
  }
  return "internal";
}

/// Process exit code for a failure kind: 2 validation, 3 numerical
/// non-convergence, 4 capacity, 5 internal.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain:
    case ErrorKind::unsupported:
    case ErrorKind::threshold:
    case ErrorKind::resolution:
    case ErrorKind::shape:
    case ErrorKind::integrability:
    case ErrorKind::exponent:
    case ErrorKind::validation:
      return 2;
    case ErrorKind::numerical:
    case ErrorKind::spectral:
    case ErrorKind::positivity:
    case ErrorKind::fold:
    case ErrorKind::convergence:
    case ErrorKind::seed:
      return 3;
    case ErrorKind::capacity:
      return 4;
    case ErrorKind::internal:
      return 5;
  }
  return 5;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace helmbranch
