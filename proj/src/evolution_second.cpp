#include "vem/evolution_second.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "vem/error.hpp"

namespace vem {
namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

Vec defect_at(const OcpProblem& p, const SecondEqSnapshot& snap, double t) {
  return snap.states.slope(t) - p.f(snap.states.at(t), snap.controls.at(t), t);
}

Vec initial_offset(const OcpProblem& p, const SecondEqSnapshot& snap) {
  return snap.states.node(0) - p.x0;
}

// Gauss-Legendre nodes and weights on [-1, 1] from the Jacobi matrix eigenpairs.
void gauss_legendre(int points, Vec& nodes, Vec& weights) {
  Mat J = Mat::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(J);
  nodes = eig.eigenvalues();
  weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
}

}  // namespace

SecondEqSnapshot SecondEqSnapshot::make(const TimeGrid& grid, Mat states, Mat controls) {
  return SecondEqSnapshot{StateTrajectory::interpolated(grid, std::move(states)),
                          ControlTrajectory(grid, std::move(controls))};
}

Mat SecondEqSnapshot::defect(const OcpProblem& p) const {
  Mat d(grid().size(), p.n);
  for (int i = 0; i < grid().size(); ++i) {
    const double t = grid().time(i);
    d.row(i) = (states.node_slope(i) - p.f(states.node(i), controls.node(i), t)).transpose();
  }
  return d;
}

Mat adjoint_second(const OcpProblem& p, const SecondEqSnapshot& snap, MultiplierMode mode,
                   const IntegratorOptions& opts) {
  AdjointForcing forcing;
  if (mode != MultiplierMode::modified && p.hess_phixx) {
    forcing = [&](double t) -> Vec {
      return p.phi_xx(snap.states.at(t), t) * defect_at(p, snap, t);
    };
  }
  return adjoint_sweep(p, snap.states, snap.controls, opts, forcing);
}

Mat pu_second(const OcpProblem& p, const SecondEqSnapshot& snap, MultiplierMode mode,
              const IntegratorOptions& opts) {
  return pu_from_adjoint(p, snap.states, snap.controls, adjoint_second(p, snap, mode, opts));
}

Vec terminal_velocity_second(const OcpProblem& p, const SecondEqSnapshot& snap,
                             MultiplierMode mode) {
  const int last = snap.grid().size() - 1;
  if (mode == MultiplierMode::modified) return snap.states.node_slope(last);
  return p.f(snap.states.node(last), snap.controls.node(last), snap.tf());
}

Vec infeasibility_drift(const OcpProblem& p, const SecondEqSnapshot& snap, const GainSet& gains,
                        const IntegratorOptions& opts) {
  const VectorField field = [&](double t, const Vec& y) {
    const Vec x = snap.states.at(t);
    const Vec u = snap.controls.at(t);
    return Vec(p.fx(x, u, t) * y + gains.K_f * (snap.states.slope(t) - p.f(x, u, t)));
  };
  const Vec y0 = gains.K_x0 * initial_offset(p, snap);
  return rk45_integrate(field, y0, snap.grid().t0(), snap.tf(), opts).y_stop();
}

Vec multiplier_second(const OcpProblem& p, const SecondEqSnapshot& snap,
                      const TransitionStack& stack, const Mat& pu, const GainSet& gains,
                      MultiplierMode mode, const IntegratorOptions& opts) {
  if (p.q == 0) return Vec::Zero(0);
  const bool tf_free = p.tf_mode.free;
  const Vec v = terminal_velocity_second(p, snap, mode);
  PiSolveInputs in;
  in.mode = mode;
  in.M = multiplier_matrix(p, snap.states, snap.controls, stack, gains, tf_free, v);
  in.r = multiplier_vector(p, snap.states, snap.controls, stack, pu, gains, tf_free, v,
                           mode != MultiplierMode::feasible);
  if (mode == MultiplierMode::modified) {
    in.r += p.gx(snap.states.terminal(), snap.tf()) * infeasibility_drift(p, snap, gains, opts);
  }
  return solve_pi(in);
}

Mat control_rhs_second(const OcpProblem& p, const SecondEqSnapshot& snap,
                       const TransitionStack& stack, const Mat& pu, const Vec& pi,
                       const GainSet& gains) {
  return control_rhs(p, snap.states, snap.controls, stack, pu, pi, gains);
}

Mat state_rhs_second(const OcpProblem& p, const SecondEqSnapshot& snap, const Mat& control_rates,
                     const GainSet& gains, MultiplierMode mode, const IntegratorOptions& opts) {
  const TimeGrid& grid = snap.grid();
  const ControlTrajectory rate(grid, control_rates);
  const bool modified = mode == MultiplierMode::modified;
  const VectorField field = [&](double t, const Vec& w) {
    const Vec x = snap.states.at(t);
    const Vec u = snap.controls.at(t);
    Vec d = p.fx(x, u, t) * w + p.fu(x, u, t) * rate.at(t);
    if (modified) d -= gains.K_f * (snap.states.slope(t) - p.f(x, u, t));
    return d;
  };
  const Vec w0 = modified ? Vec(-gains.K_x0 * initial_offset(p, snap)) : Vec(Vec::Zero(p.n));
  Mat out(grid.size(), p.n);
  out.row(0) = w0.transpose();
  if (!modified && control_rates.isZero(0.0)) {
    out.setZero();
    return out;
  }
  const SolutionPath path = rk45_integrate(field, w0, grid.t0(), grid.tf(), opts);
  for (int i = 1; i + 1 < grid.size(); ++i) out.row(i) = path.eval(grid.time(i)).transpose();
  out.row(grid.size() - 1) = path.y_stop().transpose();
  return out;
}

Mat state_rhs_convolution(const OcpProblem& p, const SecondEqSnapshot& snap,
                          const ForwardTransition& fwd, const Mat& control_rates,
                          const GainSet& gains, MultiplierMode mode, int gauss_points) {
  if (gauss_points < 1) raise(ErrorCode::invalid_argument, "need at least one Gauss point");
  const TimeGrid& grid = snap.grid();
  const ControlTrajectory rate(grid, control_rates);
  const bool modified = mode == MultiplierMode::modified;
  Vec gl_nodes;
  Vec gl_weights;
  gauss_legendre(gauss_points, gl_nodes, gl_weights);

  std::vector<double> s_points;
  std::vector<double> s_weights;
  std::vector<Vec> forcing;
  for (int k = 0; k + 1 < grid.size(); ++k) {
    const double a = grid.time(k);
    const double b = grid.time(k + 1);
    for (int j = 0; j < gauss_points; ++j) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * gl_nodes(j);
      const Vec x = snap.states.at(s);
      const Vec u = snap.controls.at(s);
      Vec h = p.fu(x, u, s) * rate.at(s);
      if (modified) h -= gains.K_f * (snap.states.slope(s) - p.f(x, u, s));
      s_points.push_back(s);
      s_weights.push_back(0.5 * (b - a) * gl_weights(j));
      forcing.push_back(std::move(h));
    }
  }

  const Vec w0 = modified ? Vec(-gains.K_x0 * initial_offset(p, snap)) : Vec(Vec::Zero(p.n));
  Mat out(grid.size(), p.n);
  out.row(0) = w0.transpose();
  for (int i = 1; i < grid.size(); ++i) {
    const double t = grid.time(i);
    Vec total = fwd.from_start_node(i) * w0;
    const std::size_t count = idx(i) * idx(gauss_points);
    for (std::size_t k = 0; k < count; ++k) {
      total += s_weights[k] * (fwd.between(t, s_points[k]) * forcing[k]);
    }
    out.row(i) = total.transpose();
  }
  return out;
}

double tf_rhs_second(const OcpProblem& p, const SecondEqSnapshot& snap, const Vec& pi,
                     const GainSet& gains, MultiplierMode mode) {
  const TimeGrid& grid = snap.grid();
  if (grid.duration() < kMinHorizon) {
    raise(ErrorCode::tf_collapse,
          "terminal time collapsed to tf - t0 = " + std::to_string(grid.duration()));
  }
  const int last = grid.size() - 1;
  return -gains.k_tf * transversality_expression(p, snap.states.node(last),
                                                 snap.controls.node(last), grid.tf(), pi,
                                                 terminal_velocity_second(p, snap, mode));
}

}  // namespace vem
