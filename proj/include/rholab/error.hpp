#pragma once

#include <stdexcept>
#include <string>

namespace rholab {

enum class ErrorCode {
  dimension_mismatch,
  invalid_norm,
  invalid_argument,
  zero_vector,
  nonsmooth_point,
  config_error,
  io_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_norm: return "invalid_norm";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::zero_vector: return "zero_vector";
    case ErrorCode::nonsmooth_point: return "nonsmooth_point";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

// Precondition and contract violations. Numerical shortfalls are never thrown;
// they surface as flags on the returned value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rholab
