#include "vem/error.hpp"

namespace vem {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::non_finite_callback: return "NonFiniteCallback";
    case ErrorCode::non_finite_field: return "NonFiniteField";
    case ErrorCode::non_finite_dynamics: return "NonFiniteDynamics";
    case ErrorCode::step_failure: return "StepFailure";
    case ErrorCode::degenerate_grid: return "DegenerateGrid";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::tf_collapse: return "TfCollapse";
    case ErrorCode::io_failure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace vem
