#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vem/ocp_model.hpp"

namespace vem::checks {

struct CheckResult {
  std::string name;
  double value = 0.0;      // observed discrepancy (or order, for order checks)
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Double integrator with L = (u^2 + x1^2)/2 and phi = |x(tf)|^2 / 2, so that
/// every term of the control-gradient kernel is active. No terminal constraint.
OcpProblem weighted_double_integrator();

CheckResult pu_form_equivalence(std::uint64_t seed);
CheckResult transition_consistency(std::uint64_t seed);
CheckResult convolution_equivalence(std::uint64_t seed);
CheckResult mode_reduction_chain(std::uint64_t seed);
CheckResult integrator_order();
CheckResult spline_cubic_reproduction(std::uint64_t seed);
CheckResult stationarity_at_optimum();
CheckResult dense_solve_residual(std::uint64_t seed);

/// Analytic derivatives of every registered benchmark (and the weighted
/// fixture) against central differences at random points.
std::vector<CheckResult> derivative_suite(std::uint64_t seed);
/// All invariant checks above.
std::vector<CheckResult> invariant_suite(std::uint64_t seed);

}  // namespace vem::checks
