#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vem/error.hpp"
#include "vem/evolution_second.hpp"
#include "vem/evolution_third.hpp"
#include "vem/numerics/rk45.hpp"
#include "vem/ocp_model.hpp"
#include "vem/trajectory.hpp"

namespace vem {

enum class Method { second, third };

std::string to_string(Method method);
std::string to_string(MultiplierMode mode);
std::optional<Method> parse_method(const std::string& text);
std::optional<MultiplierMode> parse_mode(const std::string& text);

/// Flat tau-state: third = [u_0 .. u_{N-1}] (+ tf), second = [x_0 .. x_{N-1},
/// u_0 .. u_{N-1}] (+ tf). Node blocks are contiguous.
struct EvolutionLayout {
  Method method = Method::third;
  int N = 0;
  int n = 0;
  int m = 0;
  bool tf_free = false;
  double fixed_tf = 0.0;

  int dimension() const;

  struct Parts {
    Mat states;    // N x n; empty (0 x n) for the third equation
    Mat controls;  // N x m
    double tf = 0.0;
  };
  Vec pack(const Parts& parts) const;
  Parts unpack(const Vec& z) const;
};

struct SystemConfig {
  Method method = Method::third;
  int N = 41;
  GainSet gains;
  MultiplierMode mode = MultiplierMode::quasi_feasible;
  /// Used by every integration in t inside one RHS evaluation.
  IntegratorOptions inner;
  std::optional<Mat> init_controls;  // N x m, zero when absent
  std::optional<Mat> init_states;    // second equation only; integrated under init_controls when absent
  std::optional<double> init_tf;     // free tf only; the problem's guess when absent
};

/// Everything one RHS evaluation produces, plus optional diagnostics.
struct Evaluation {
  Vec rate;
  double tf = 0.0;
  Mat states;
  Mat controls;
  Mat control_rate;
  Mat state_rate;  // second equation only
  double tf_rate = 0.0;
  Vec pi;
  Mat pu;
  // Filled when diagnostics are requested.
  Residuals residuals;
  Mat costates;
  double J = 0.0;
};

class EvolutionSystem {
 public:
  EvolutionSystem(OcpProblem problem, SystemConfig config);

  const OcpProblem& problem() const { return problem_; }
  const SystemConfig& config() const { return config_; }
  const EvolutionLayout& layout() const { return layout_; }
  int dimension() const { return layout_.dimension(); }
  const Vec& initial_state() const { return z0_; }

  Vec rhs(double tau, const Vec& z) const;
  Evaluation evaluate(const Vec& z, bool diagnostics) const;

 private:
  Evaluation evaluate_third(const EvolutionLayout::Parts& parts, bool diagnostics) const;
  Evaluation evaluate_second(const EvolutionLayout::Parts& parts, bool diagnostics) const;

  OcpProblem problem_;
  SystemConfig config_;
  EvolutionLayout layout_;
  Vec z0_;
};

/// Validates the configuration, builds the system and probes the RHS once at
/// the initial state so that SingularSystem and friends surface here.
EvolutionSystem assemble_ivp(const OcpProblem& p, const SystemConfig& config);

/// J = phi(x_N, tf) + Simpson quadrature of L over the node values.
double performance_index(const OcpProblem& p, const TimeGrid& grid, const Mat& states,
                         const Mat& controls);

struct Snapshot {
  double tau = 0.0;
  double tf = 0.0;
  Vec times;
  Mat states;
  Mat controls;
  Mat costates;
  Vec pi;
  double J = 0.0;
  Residuals residuals;
};

struct TracePoint {
  double tau = 0.0;
  double J = 0.0;
  double tf = 0.0;
  Vec pi;
  Residuals residuals;
};

struct EvolutionFailure {
  ErrorCode code;
  std::string message;
  double tau = 0.0;
};

struct EvolutionHistory {
  EvolutionLayout layout;
  std::vector<Snapshot> snapshots;  // strictly increasing tau, first at 0
  std::vector<TracePoint> trace;    // every accepted tau step, first at 0
  std::string termination;          // "tau_end", "converged" or "failure"
  std::optional<EvolutionFailure> failure;
  IntegratorStats stats;
  double wall_seconds = 0.0;

  const Snapshot& final_snapshot() const { return snapshots.back(); }
};

std::vector<double> default_snapshot_taus();

struct EvolveOptions {
  double tau_end = 300.0;
  /// Taus past tau_end are skipped; 0 and tau_end are always recorded.
  std::vector<double> snapshot_taus = default_snapshot_taus();
  IntegratorOptions opts;
  /// Stop once optimality <= tol * (1 + |p_u(tau=0)|_inf), constraint <= tol
  /// and transversality <= tol.
  bool early_stop = true;
  double stop_tol = 1e-6;
};

/// Integrates the tau-IVP. Solver errors are caught; the history up to the
/// failure is returned with `failure` set.
EvolutionHistory evolve(const EvolutionSystem& system, const EvolveOptions& options);

/// Analytic or oracle solution used for error reporting.
struct Reference {
  std::function<Vec(double t)> u;
  std::function<Vec(double t)> x;
  std::function<Vec(double t)> lambda;
  std::optional<double> J;
  std::optional<double> tf;
  Vec pi;
};

struct SolveReport {
  std::string problem;
  Method method = Method::third;
  MultiplierMode mode = MultiplierMode::quasi_feasible;
  int N = 0;
  int dimension = 0;
  double tau_final = 0.0;
  std::string termination;
  double J = 0.0;
  double tf = 0.0;
  Vec pi;
  Residuals residuals;
  // Sup-norm node errors against the reference at the final snapshot.
  double e_J = 0.0;
  Vec e_u;
  Vec e_x;
  std::optional<double> e_tf;
  std::optional<double> e_pi;
  std::optional<double> e_lambda;
  double wall_seconds = 0.0;
  IntegratorStats stats;
};

SolveReport summarize(const EvolutionSystem& system, const EvolutionHistory& history,
                      const std::optional<Reference>& reference);

}  // namespace vem
