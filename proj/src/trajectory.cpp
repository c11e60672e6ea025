#include "vem/trajectory.hpp"

#include <cmath>
#include <string>

#include "vem/error.hpp"

namespace vem {
namespace {

Mat unvec(const Vec& v, int n) { return Eigen::Map<const Mat>(v.data(), n, n); }

Vec vec(const Mat& M) { return Eigen::Map<const Vec>(M.data(), M.size()); }

}  // namespace

TimeGrid::TimeGrid(int N, double t0, double tf) : t0_(t0), tf_(tf) {
  if (N < 4) raise(ErrorCode::degenerate_grid, "time grid needs N >= 4, got " + std::to_string(N));
  if (!std::isfinite(t0) || !std::isfinite(tf) || !(tf > t0)) {
    raise(ErrorCode::degenerate_grid, "time grid needs finite tf > t0");
  }
  sigma_.resize(static_cast<std::size_t>(N));
  times_.resize(static_cast<std::size_t>(N));
  const double span = tf - t0;
  for (int i = 0; i < N; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(N - 1);
    sigma_[static_cast<std::size_t>(i)] = s;
    times_[static_cast<std::size_t>(i)] = t0 + s * span;
  }
  times_.front() = t0;
  times_.back() = tf;
}

ControlTrajectory::ControlTrajectory(TimeGrid grid, Mat values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() != grid_.size()) {
    raise(ErrorCode::dimension_mismatch, "control values have " +
                                             std::to_string(values_.rows()) + " rows for " +
                                             std::to_string(grid_.size()) + " nodes");
  }
  spline_ = spline_build(grid_.span(), values_);
}

StateTrajectory StateTrajectory::integrated(TimeGrid grid, Mat values, SolutionPath path) {
  StateTrajectory s(std::move(grid), std::move(values));
  s.path_ = std::make_shared<const SolutionPath>(std::move(path));
  return s;
}

StateTrajectory StateTrajectory::interpolated(TimeGrid grid, Mat values) {
  if (values.rows() != grid.size()) {
    raise(ErrorCode::dimension_mismatch, "state values do not match the grid");
  }
  StateTrajectory s(std::move(grid), std::move(values));
  s.spline_ = std::make_shared<const SplineCoeffs>(spline_build(s.grid_.span(), s.values_));
  return s;
}

Vec StateTrajectory::at(double t) const {
  if (spline_) return spline_->eval(t);
  return path_->eval(t);
}

Vec StateTrajectory::slope(double t) const {
  if (!spline_) {
    raise(ErrorCode::invalid_argument, "slope() requires an interpolated state trajectory");
  }
  return spline_->derivative(t);
}

StateTrajectory propagate_states(const OcpProblem& p, const ControlTrajectory& ctrl,
                                 const IntegratorOptions& opts) {
  const TimeGrid& grid = ctrl.grid();
  const VectorField field = [&](double t, const Vec& x) { return p.f(x, ctrl.at(t), t); };
  SolutionPath path;
  try {
    path = rk45_integrate(field, p.x0, grid.t0(), grid.tf(), opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::non_finite_field) {
      raise(ErrorCode::non_finite_dynamics, e.what());
    }
    throw;
  }
  Mat values(grid.size(), p.n);
  values.row(0) = p.x0.transpose();
  for (int i = 1; i + 1 < grid.size(); ++i) values.row(i) = path.eval(grid.time(i)).transpose();
  values.row(grid.size() - 1) = path.y_stop().transpose();
  return StateTrajectory::integrated(grid, std::move(values), std::move(path));
}

TransitionStack transition_stack(const OcpProblem& p, const StateTrajectory& states,
                                 const ControlTrajectory& ctrl, const IntegratorOptions& opts) {
  const TimeGrid& grid = states.grid();
  const int n = p.n;
  const VectorField field = [&](double t, const Vec& y) {
    const Mat psi = unvec(y, n);
    const Mat A = p.fx(states.at(t), ctrl.at(t), t);
    return Vec(vec(-A.transpose() * psi));
  };
  const SolutionPath path =
      rk45_integrate(field, vec(Mat::Identity(n, n)), grid.tf(), grid.t0(), opts);

  TransitionStack stack{grid, {}};
  stack.psi.resize(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i + 1 < grid.size(); ++i) {
    stack.psi[static_cast<std::size_t>(i)] = unvec(path.eval(grid.time(i)), n);
  }
  stack.psi.back() = Mat::Identity(n, n);
  return stack;
}

ForwardTransition::ForwardTransition(const OcpProblem& p, const StateTrajectory& states,
                                     const ControlTrajectory& ctrl, const IntegratorOptions& opts)
    : n_(p.n), grid_(states.grid()) {
  const int n = n_;
  const VectorField field = [&](double t, const Vec& y) {
    const Mat phi = unvec(y, n);
    return Vec(vec(p.fx(states.at(t), ctrl.at(t), t) * phi));
  };
  path_ = rk45_integrate(field, vec(Mat::Identity(n, n)), grid_.t0(), grid_.tf(), opts);
  nodes_.resize(static_cast<std::size_t>(grid_.size()));
  nodes_.front() = Mat::Identity(n, n);
  for (int i = 1; i + 1 < grid_.size(); ++i) {
    nodes_[static_cast<std::size_t>(i)] = unvec(path_.eval(grid_.time(i)), n);
  }
  nodes_.back() = unvec(path_.y_stop(), n);
}

Mat ForwardTransition::from_start(double t) const { return unvec(path_.eval(t), n_); }

namespace {
Mat compose(const Mat& phi_t, const Mat& phi_s) {
  Eigen::FullPivLU<Mat> lu(phi_s);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    raise(ErrorCode::singular_system, "forward transition matrix is numerically singular");
  }
  return phi_t * lu.inverse();
}
}  // namespace

Mat ForwardTransition::between(double t, double s) const {
  return compose(from_start(t), from_start(s));
}

Mat phi_between(const ForwardTransition& fwd, int i, int j) {
  if (j > i) raise(ErrorCode::invalid_argument, "phi_between requires j <= i");
  if (i == j) return Mat::Identity(fwd.from_start_node(i).rows(), fwd.from_start_node(i).cols());
  return compose(fwd.from_start_node(i), fwd.from_start_node(j));
}

}  // namespace vem
