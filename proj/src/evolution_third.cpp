#include "vem/evolution_third.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "vem/error.hpp"
#include "vem/numerics/linear_solve.hpp"
#include "vem/numerics/quadrature.hpp"

namespace vem {
namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

void require_consistent(const StateTrajectory& states, const ControlTrajectory& ctrl) {
  if (states.grid().size() != ctrl.grid().size() || states.grid().tf() != ctrl.grid().tf()) {
    raise(ErrorCode::dimension_mismatch, "state and control trajectories use different grids");
  }
}

Vec terminal_f(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl) {
  const int last = states.grid().size() - 1;
  return p.f(states.node(last), ctrl.node(last), states.grid().tf());
}

}  // namespace

Mat adjoint_sweep(const OcpProblem& p, const StateTrajectory& states,
                  const ControlTrajectory& ctrl, const IntegratorOptions& opts,
                  const AdjointForcing& forcing) {
  require_consistent(states, ctrl);
  const TimeGrid& grid = states.grid();
  const Vec xf = states.terminal();
  const Vec lt_final = p.phi_x(xf, grid.tf());

  Mat out(grid.size(), p.n);
  out.row(grid.size() - 1) = lt_final.transpose();
  const bool trivial = !p.has_running_cost() && !forcing && lt_final.isZero(0.0);
  if (trivial) {
    out.setZero();
    return out;
  }

  const VectorField field = [&](double t, const Vec& lt) {
    const Vec x = states.at(t);
    const Vec u = ctrl.at(t);
    Vec d = -p.fx(x, u, t).transpose() * lt - p.Lx(x, u, t);
    if (forcing) d += forcing(t);
    return d;
  };
  const SolutionPath path = rk45_integrate(field, lt_final, grid.tf(), grid.t0(), opts);
  for (int i = 0; i + 1 < grid.size(); ++i) out.row(i) = path.eval(grid.time(i)).transpose();
  return out;
}

Mat pu_from_adjoint(const OcpProblem& p, const StateTrajectory& states,
                    const ControlTrajectory& ctrl, const Mat& adjoint) {
  const TimeGrid& grid = states.grid();
  Mat pu(grid.size(), p.m);
  for (int i = 0; i < grid.size(); ++i) {
    const Vec x = states.node(i);
    const Vec u = ctrl.node(i);
    const double t = grid.time(i);
    pu.row(i) = (p.Lu(x, u, t) + p.fu(x, u, t).transpose() * adjoint.row(i).transpose())
                    .transpose();
  }
  return pu;
}

Mat compute_pu(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
               const IntegratorOptions& opts) {
  return pu_from_adjoint(p, states, ctrl, adjoint_sweep(p, states, ctrl, opts));
}

Mat compute_pu_quadrature(const OcpProblem& p, const StateTrajectory& states,
                          const ControlTrajectory& ctrl, const ForwardTransition& fwd) {
  require_consistent(states, ctrl);
  const TimeGrid& grid = states.grid();
  const int N = grid.size();

  // Phi(s, t)^T = Phi(t, t0)^{-T} Phi(s, t0)^T splits the kernel, so one
  // right-cumulative sum serves every node.
  std::vector<Vec> weighted(idx(N));
  std::vector<Vec> phix(idx(N));
  for (int j = 0; j < N; ++j) {
    const Vec x = states.node(j);
    const Vec u = ctrl.node(j);
    const double t = grid.time(j);
    phix[idx(j)] = p.phi_x(x, t);
    const Vec h = p.Lx(x, u, t) + p.phi_xt(x, t) + p.phi_xx(x, t).transpose() * p.f(x, u, t) +
                  p.fx(x, u, t).transpose() * phix[idx(j)];
    weighted[idx(j)] = fwd.from_start_node(j).transpose() * h;
  }
  const std::vector<Vec> tails = cumulative_from_right(grid.span(), weighted);

  Mat pu(N, p.m);
  for (int i = 0; i < N; ++i) {
    Eigen::FullPivLU<Mat> lu(fwd.from_start_node(i).transpose());
    if (!lu.isInvertible()) {
      raise(ErrorCode::singular_system, "forward transition matrix is numerically singular");
    }
    const Vec tail = lu.solve(tails[idx(i)]);
    const Vec x = states.node(i);
    const Vec u = ctrl.node(i);
    const double t = grid.time(i);
    pu.row(i) = (p.Lu(x, u, t) + p.fu(x, u, t).transpose() * (phix[idx(i)] + tail)).transpose();
  }
  return pu;
}

Mat multiplier_matrix(const OcpProblem& p, const StateTrajectory& states,
                      const ControlTrajectory& ctrl, const TransitionStack& stack,
                      const GainSet& gains, bool tf_free, const Vec& terminal_velocity) {
  require_consistent(states, ctrl);
  const TimeGrid& grid = states.grid();
  const int N = grid.size();
  const Vec xf = states.terminal();
  const Mat gx = p.gx(xf, grid.tf());

  std::vector<Mat> gramian(idx(N));
  for (int i = 0; i < N; ++i) {
    const Mat B = stack.psi[idx(i)].transpose() * p.fu(states.node(i), ctrl.node(i), grid.time(i));
    gramian[idx(i)] = B * gains.K * B.transpose();
  }
  Mat M = gx * grid_quadrature(grid.span(), gramian) * gx.transpose();
  if (tf_free) {
    const Vec c = gx * terminal_velocity + p.gt(xf, grid.tf());
    M += gains.k_tf * (c * c.transpose());
  }
  return M;
}

Vec multiplier_vector(const OcpProblem& p, const StateTrajectory& states,
                      const ControlTrajectory& ctrl, const TransitionStack& stack, const Mat& pu,
                      const GainSet& gains, bool tf_free, const Vec& terminal_velocity,
                      bool subtract_constraint) {
  require_consistent(states, ctrl);
  const TimeGrid& grid = states.grid();
  const int N = grid.size();
  const int last = N - 1;
  const double tf = grid.tf();
  const Vec xf = states.terminal();
  const Mat gx = p.gx(xf, tf);

  std::vector<Vec> samples(idx(N));
  for (int i = 0; i < N; ++i) {
    const Mat fu = p.fu(states.node(i), ctrl.node(i), grid.time(i));
    samples[idx(i)] = stack.psi[idx(i)].transpose() * fu * gains.K * pu.row(i).transpose();
  }
  Vec r = gx * grid_quadrature(grid.span(), samples);
  if (tf_free) {
    const Vec uf = ctrl.node(last);
    const Vec c = gx * terminal_velocity + p.gt(xf, tf);
    const double cost_rate =
        p.phi_t(xf, tf) + p.phi_x(xf, tf).dot(terminal_velocity) + p.L(xf, uf, tf);
    r += gains.k_tf * cost_rate * c;
  }
  if (subtract_constraint) r -= gains.K_g * p.g(xf, tf);
  return r;
}

Mat compute_M(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
              const TransitionStack& stack, const GainSet& gains, bool tf_free) {
  const Vec v = tf_free ? terminal_f(p, states, ctrl) : Vec::Zero(p.n);
  return multiplier_matrix(p, states, ctrl, stack, gains, tf_free, v);
}

Vec compute_r(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
              const TransitionStack& stack, const Mat& pu, const GainSet& gains, bool tf_free,
              MultiplierMode mode) {
  if (mode == MultiplierMode::modified) {
    raise(ErrorCode::invalid_argument,
          "the modified multiplier mode belongs to the second evolution equation");
  }
  const Vec v = tf_free ? terminal_f(p, states, ctrl) : Vec::Zero(p.n);
  return multiplier_vector(p, states, ctrl, stack, pu, gains, tf_free, v,
                           mode == MultiplierMode::quasi_feasible);
}

Vec solve_pi(const PiSolveInputs& inputs) {
  if (inputs.M.size() == 0) return Vec::Zero(0);
  const Mat& M = inputs.M;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    raise(ErrorCode::invalid_argument, "multiplier matrix is not symmetric");
  }
  return -solve_dense(M, inputs.r).x;
}

namespace {
Vec constraint_direction(const OcpProblem& p, const StateTrajectory& states, const Vec& pi) {
  if (pi.size() == 0) return Vec::Zero(p.n);
  return p.gx(states.terminal(), states.grid().tf()).transpose() * pi;
}
}  // namespace

Mat control_rhs(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
                const TransitionStack& stack, const Mat& pu, const Vec& pi, const GainSet& gains) {
  const TimeGrid& grid = states.grid();
  const Vec lam_f = constraint_direction(p, states, pi);
  Mat rate(grid.size(), p.m);
  for (int i = 0; i < grid.size(); ++i) {
    const Mat fu = p.fu(states.node(i), ctrl.node(i), grid.time(i));
    const Vec bracket = pu.row(i).transpose() + fu.transpose() * (stack.psi[idx(i)] * lam_f);
    rate.row(i) = -(gains.K * bracket).transpose();
  }
  return rate;
}

double transversality_expression(const OcpProblem& p, const Vec& xf, const Vec& uf, double tf,
                                 const Vec& pi, const Vec& terminal_velocity) {
  double value = p.L(xf, uf, tf) + p.phi_t(xf, tf) + p.phi_x(xf, tf).dot(terminal_velocity);
  if (pi.size() > 0) value += pi.dot(p.gx(xf, tf) * terminal_velocity + p.gt(xf, tf));
  return value;
}

double tf_rhs(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
              const Vec& pi, const GainSet& gains) {
  const TimeGrid& grid = states.grid();
  if (grid.duration() < kMinHorizon) {
    raise(ErrorCode::tf_collapse, "terminal time collapsed to tf - t0 = " +
                                      std::to_string(grid.duration()));
  }
  const int last = grid.size() - 1;
  return -gains.k_tf * transversality_expression(p, states.node(last), ctrl.node(last), grid.tf(),
                                                 pi, terminal_f(p, states, ctrl));
}

Residuals optimality_residuals(const OcpProblem& p, const StateTrajectory& states,
                               const ControlTrajectory& ctrl, const TransitionStack& stack,
                               const Mat& pu, const Vec& pi) {
  const TimeGrid& grid = states.grid();
  const Vec lam_f = constraint_direction(p, states, pi);
  Residuals res;
  for (int i = 0; i < grid.size(); ++i) {
    const Mat fu = p.fu(states.node(i), ctrl.node(i), grid.time(i));
    const Vec bracket = pu.row(i).transpose() + fu.transpose() * (stack.psi[idx(i)] * lam_f);
    res.optimality_inf = std::max(res.optimality_inf, bracket.cwiseAbs().maxCoeff());
  }
  const int last = grid.size() - 1;
  if (p.tf_mode.free) {
    res.transversality = std::abs(transversality_expression(
        p, states.node(last), ctrl.node(last), grid.tf(), pi, terminal_f(p, states, ctrl)));
  }
  if (p.q > 0) res.constraint_inf = p.g(states.terminal(), grid.tf()).cwiseAbs().maxCoeff();
  return res;
}

Mat reconstruct_costates(const OcpProblem& p, const StateTrajectory& states,
                         const TransitionStack& stack, const Mat& adjoint, const Vec& pi) {
  const Vec lam_f = constraint_direction(p, states, pi);
  Mat lambda = adjoint;
  for (int i = 0; i < states.grid().size(); ++i) {
    lambda.row(i) += (stack.psi[idx(i)] * lam_f).transpose();
  }
  return lambda;
}

}  // namespace vem
