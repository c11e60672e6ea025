#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vem/numerics/rk45.hpp"
#include "vem/numerics/spline.hpp"
#include "vem/ocp_model.hpp"

namespace vem {

/// Uniform grid on normalized time sigma_i = i/(N-1); physical nodes are
/// t_i = t0 + sigma_i*(tf - t0). The sigma values never depend on tf.
class TimeGrid {
 public:
  TimeGrid(int N, double t0, double tf);

  int size() const { return static_cast<int>(sigma_.size()); }
  double t0() const { return t0_; }
  double tf() const { return tf_; }
  double duration() const { return tf_ - t0_; }
  const std::vector<double>& sigma() const { return sigma_; }
  const std::vector<double>& times() const { return times_; }
  double time(int i) const { return times_[static_cast<std::size_t>(i)]; }
  std::span<const double> span() const { return times_; }

  TimeGrid rescaled(double tf) const { return TimeGrid(size(), t0_, tf); }

 private:
  double t0_;
  double tf_;
  std::vector<double> sigma_;
  std::vector<double> times_;
};

/// Node controls (N x m) and their per-channel spline over physical time.
class ControlTrajectory {
 public:
  ControlTrajectory(TimeGrid grid, Mat values);

  const TimeGrid& grid() const { return grid_; }
  const Mat& values() const { return values_; }
  Vec node(int i) const { return values_.row(i).transpose(); }
  Vec at(double t) const { return spline_.eval(t); }
  Vec slope(double t) const { return spline_.derivative(t); }

 private:
  TimeGrid grid_;
  Mat values_;
  SplineCoeffs spline_;
};

/// Node states (N x n) plus a dense path for off-node queries. An integrated
/// trajectory reads off-node values from the integrator's dense output; an
/// interpolated one (second evolution equation) uses a state spline, which also
/// supplies the time derivative dx/dt.
class StateTrajectory {
 public:
  static StateTrajectory integrated(TimeGrid grid, Mat values, SolutionPath path);
  static StateTrajectory interpolated(TimeGrid grid, Mat values);

  const TimeGrid& grid() const { return grid_; }
  const Mat& values() const { return values_; }
  Vec node(int i) const { return values_.row(i).transpose(); }
  Vec terminal() const { return values_.row(values_.rows() - 1).transpose(); }
  bool is_interpolated() const { return spline_ != nullptr; }

  Vec at(double t) const;
  /// dx/dt of the interpolating spline; only valid for interpolated trajectories.
  Vec slope(double t) const;
  Vec node_slope(int i) const { return slope(grid_.time(i)); }

 private:
  StateTrajectory(TimeGrid grid, Mat values) : grid_(std::move(grid)), values_(std::move(values)) {}

  TimeGrid grid_;
  Mat values_;
  std::shared_ptr<const SolutionPath> path_;
  std::shared_ptr<const SplineCoeffs> spline_;
};

/// psi[i] = Phi(tf, t_i)^T, each n x n, at every grid node.
struct TransitionStack {
  TimeGrid grid;
  std::vector<Mat> psi;
};

/// Integrates x' = f(x, u(t), t) from x0 with the control spline.
StateTrajectory propagate_states(const OcpProblem& p, const ControlTrajectory& ctrl,
                                 const IntegratorOptions& opts);

/// Backward matrix IVP dPsi/dt = -f_x^T Psi with Psi(tf) = I.
TransitionStack transition_stack(const OcpProblem& p, const StateTrajectory& states,
                                 const ControlTrajectory& ctrl, const IntegratorOptions& opts);

/// Forward transition matrices Phi(t, t0) from dPhi/dt = f_x Phi, Phi(t0, t0) = I,
/// kept as a dense path so Phi(t, s) = Phi(t, t0) Phi(s, t0)^{-1} is available
/// at arbitrary times.
class ForwardTransition {
 public:
  ForwardTransition(const OcpProblem& p, const StateTrajectory& states,
                    const ControlTrajectory& ctrl, const IntegratorOptions& opts);

  const TimeGrid& grid() const { return grid_; }
  Mat from_start(double t) const;
  Mat from_start_node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  /// Phi(t, s); throws SingularSystem if Phi(s, t0) is numerically singular.
  Mat between(double t, double s) const;

 private:
  int n_;
  TimeGrid grid_;
  SolutionPath path_;
  std::vector<Mat> nodes_;
};

/// Phi(t_i, t_j) for grid nodes j <= i.
Mat phi_between(const ForwardTransition& fwd, int i, int j);

}  // namespace vem
