#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace vem {

struct IntegratorOptions {
  double rtol = 1e-3;
  double atol = 1e-6;
  long max_steps = 200000;
  std::optional<double> initial_step;
  std::optional<double> max_step;  // |t_stop - t_start| / 10 when absent

  void validate() const;
};

using VectorField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& y)>;

/// One accepted Dormand-Prince step together with its continuous extension.
///
/// The interpolant is the standard fourth-order dense output of DOPRI5:
///   y(t_begin + theta*h) = r0 + theta*(r1 + (1-theta)*(r2 + theta*(r3 + (1-theta)*r4)))
struct StepSegment {
  double t_begin = 0.0;
  double h = 0.0;  // signed; negative for backward integration
  std::array<Eigen::VectorXd, 5> coeffs;

  double t_end() const { return t_begin + h; }
  Eigen::VectorXd eval(double t) const;
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

/// Dense solution of an initial-value problem over [t_start, t_stop] (either
/// direction). Query times outside the span are clamped to its endpoints.
class SolutionPath {
 public:
  SolutionPath() = default;
  SolutionPath(double t_start, Eigen::VectorXd y_start);

  void append(StepSegment segment);

  double t_start() const { return t_start_; }
  double t_stop() const { return segments_.empty() ? t_start_ : segments_.back().t_end(); }
  const Eigen::VectorXd& y_start() const { return y_start_; }
  const Eigen::VectorXd& y_stop() const { return y_stop_; }
  std::size_t steps() const { return segments_.size(); }
  const std::vector<StepSegment>& segments() const { return segments_; }

  Eigen::VectorXd eval(double t) const;

  IntegratorStats stats;

 private:
  double t_start_ = 0.0;
  Eigen::VectorXd y_start_;
  Eigen::VectorXd y_stop_;
  std::vector<StepSegment> segments_;
};

/// Called after every accepted step; return false to stop the integration
/// at the end of that step.
using StepObserver = std::function<bool(const StepSegment& segment, const Eigen::VectorXd& y_end)>;

struct IntegrationOutcome {
  double t_reached = 0.0;
  Eigen::VectorXd y;
  IntegratorStats stats;
  bool stopped_by_observer = false;
};

/// Adaptive Dormand-Prince 4(5) with proportional step control. Local error is
/// bounded per component by atol + rtol*max(|y_old|, |y_new|) in the max norm.
IntegrationOutcome rk45_drive(const VectorField& field, const Eigen::VectorXd& y0, double t_start,
                              double t_stop, const IntegratorOptions& opts,
                              const StepObserver& observer);

SolutionPath rk45_integrate(const VectorField& field, const Eigen::VectorXd& y0, double t_start,
                            double t_stop, const IntegratorOptions& opts = {});

/// Fixed-step fifth-order Dormand-Prince propagation (no error control). Used
/// for order verification.
Eigen::VectorXd rk45_fixed(const VectorField& field, const Eigen::VectorXd& y0, double t_start,
                           double t_stop, int steps);

}  // namespace vem
