#pragma once

#include <stdexcept>
#include <string>

namespace modlab {

enum class ErrorCode {
  invalid_horizon,
  resource,
  horizon_exceeded,
  invalid_modulus,
  domain,
  non_primitive,
  invalid_scheme,
  invalid_phi,
  invalid_measure,
  invalid_argument,
  aliasing,
  dim_mismatch,
  window_exceeded,
  unsupported_decomposition,
  missing_table,
  parse,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_horizon: return "invalid-horizon";
    case ErrorCode::resource: return "resource";
    case ErrorCode::horizon_exceeded: return "horizon-exceeded";
    case ErrorCode::invalid_modulus: return "invalid-modulus";
    case ErrorCode::domain: return "domain";
    case ErrorCode::non_primitive: return "non-primitive-representation";
    case ErrorCode::invalid_scheme: return "invalid-scheme";
    case ErrorCode::invalid_phi: return "invalid-phi";
    case ErrorCode::invalid_measure: return "invalid-measure";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::aliasing: return "aliasing";
    case ErrorCode::dim_mismatch: return "dim-mismatch";
    case ErrorCode::window_exceeded: return "window-exceeded";
    case ErrorCode::unsupported_decomposition: return "unsupported-decomposition";
    case ErrorCode::missing_table: return "missing-table";
    case ErrorCode::parse: return "parse";
  }
  return "unknown";
}

/// Single exception type for the library; `code()` says which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace modlab
