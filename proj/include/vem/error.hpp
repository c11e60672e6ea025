#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vem {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_finite_callback,
  non_finite_field,
  non_finite_dynamics,
  step_failure,
  degenerate_grid,
  singular_system,
  tf_collapse,
  io_failure,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// that callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace vem
