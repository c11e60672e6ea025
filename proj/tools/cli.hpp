#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vem/error.hpp"
#include "vem/evolve_driver.hpp"

namespace vem::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kStepFailure = 3,
  kSingularSystem = 4,
  kTfCollapse = 5,
  kNonFinite = 6,
  kDimensionMismatch = 7,
  kIo = 8,
};

int exit_code_for(ErrorCode code);

/// One solve request. Unset overrides keep the benchmark's own values.
struct RunConfig {
  std::string problem = "double-integrator";
  Method method = Method::third;
  MultiplierMode mode = MultiplierMode::quasi_feasible;
  std::optional<int> N;
  std::optional<double> tau_end;
  std::vector<double> snapshots = default_snapshot_taus();
  std::optional<double> K, K_g, k_tf, K_x0, K_f;
  double rtol = 1e-3;
  double atol = 1e-6;
  std::optional<double> inner_rtol, inner_atol;
  std::filesystem::path out_dir;
  bool early_stop = true;
  std::uint64_t seed = 1;
};

/// Output directory used when --out is absent: $VEM_OUTPUT_DIR, else "vem_out".
std::filesystem::path default_output_dir();

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vem::cli
