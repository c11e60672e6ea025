#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vem/evolve_driver.hpp"
#include "vem/ocp_model.hpp"

namespace vem {

struct Benchmark {
  OcpProblem problem;
  GainSet gains;
  int N = 0;
  double tau_end = 300.0;
  Reference reference;
};

/// Minimum-energy double integrator: x1' = x2, x2' = u, J = 1/2 int u^2,
/// x(0) = [1, 1], g = x(2). Analytic optimum u = 3t - 3.5, pi = [3, -2.5].
Benchmark double_integrator();

/// Minimum-time descent under gravity with state (x, y, V) and the terminal
/// constraint (x, y)(tf) = (2, -2); the reference is the cycloid below.
Benchmark brachistochrone();

/// Cycloid x = a(theta - sin theta), y = -a(1 - cos theta) from the origin
/// through (x_target, -drop), traversed with theta = sqrt(gravity / a) t.
struct Cycloid {
  double gravity = 10.0;
  double theta_f = 0.0;
  double radius = 0.0;  // a
  double tf = 0.0;

  double theta(double t) const;
  Vec state(double t) const;  // (x, y, V)
  double control(double t) const { return 0.5 * theta(t); }
  /// Terminal-constraint multipliers of the minimum-time problem.
  Vec multipliers() const;
};

Cycloid cycloid_through(double x_target, double drop, double gravity);

using BenchmarkFactory = std::function<Benchmark()>;

/// Registry keyed by name. The built-ins are "double-integrator" and
/// "brachistochrone"; register additional problems before any lookup.
void register_benchmark(const std::string& name, BenchmarkFactory factory);
std::optional<Benchmark> find_benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

}  // namespace vem
