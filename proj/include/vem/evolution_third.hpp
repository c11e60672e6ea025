#pragma once

#include <functional>

#include <Eigen/Dense>

#include "vem/ocp_model.hpp"
#include "vem/trajectory.hpp"

namespace vem {

/// How the terminal-constraint residual enters the multiplier solve.
///   feasible        r carries no -K_g g term; g is preserved along tau.
///   quasi_feasible  r = ... - K_g g; g decays like exp(-K_g tau).
///   modified        second equation only: infeasible-domain M and r.
enum class MultiplierMode { feasible, quasi_feasible, modified };

struct PiSolveInputs {
  Mat M;  // q x q
  Vec r;  // q
  MultiplierMode mode = MultiplierMode::quasi_feasible;
};

struct Residuals {
  double optimality_inf = 0.0;  // sup over nodes of |p_u + f_u^T Psi g_x^T pi|_inf
  double transversality = 0.0;  // |L + phi_t + phi_x^T f + pi^T (g_x f + g_t)| at tf (free tf)
  double constraint_inf = 0.0;  // |g(x(tf), tf)|_inf
};

/// Extra forcing in the backward sweep below, evaluated along the trajectory.
using AdjointForcing = std::function<Vec(double t)>;

/// Backward sweep lt' = -f_x^T lt - L_x [+ forcing(t)], lt(tf) = phi_x(x(tf), tf).
/// Returns lt at every node (N x n). Without forcing, lt(t) equals
/// Psi(t) phi_x(tf) + integral_t^tf Phi(s, t)^T L_x(s) ds.
Mat adjoint_sweep(const OcpProblem& p, const StateTrajectory& states,
                  const ControlTrajectory& ctrl, const IntegratorOptions& opts,
                  const AdjointForcing& forcing = {});

/// p_u = L_u + f_u^T lt at every node, from the adjoint values above (N x m).
Mat pu_from_adjoint(const OcpProblem& p, const StateTrajectory& states,
                    const ControlTrajectory& ctrl, const Mat& adjoint);

/// Gradient of J with respect to the control, adjoint form (one backward sweep).
Mat compute_pu(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
               const IntegratorOptions& opts);

/// Same quantity from the explicit kernel form: L_u + f_u^T phi_x(t) plus
/// f_u^T times the right-cumulative trapezoid of
/// Phi(s, t)^T (L_x + phi_xt + phi_xx^T f + f_x^T phi_x)(s), with phi and its
/// derivatives evaluated along the trajectory. Kept as an independent check on
/// compute_pu; accuracy is that of the trapezoid rule on the grid.
Mat compute_pu_quadrature(const OcpProblem& p, const StateTrajectory& states,
                          const ControlTrajectory& ctrl, const ForwardTransition& fwd);

/// Multiplier matrix with an explicit terminal velocity v standing in for
/// dx/dt at tf (f for feasible trajectories, the state-spline slope in the
/// modified second equation).
Mat multiplier_matrix(const OcpProblem& p, const StateTrajectory& states,
                      const ControlTrajectory& ctrl, const TransitionStack& stack,
                      const GainSet& gains, bool tf_free, const Vec& terminal_velocity);

/// Multiplier vector with an explicit terminal velocity; the -K_g g term is
/// included when subtract_constraint is set.
Vec multiplier_vector(const OcpProblem& p, const StateTrajectory& states,
                      const ControlTrajectory& ctrl, const TransitionStack& stack, const Mat& pu,
                      const GainSet& gains, bool tf_free, const Vec& terminal_velocity,
                      bool subtract_constraint);

/// M = g_x (int Psi^T f_u K f_u^T Psi dt) g_x^T [+ k_tf c c^T at tf], with
/// c = g_x f + g_t. The k_tf term is skipped entirely when tf is fixed.
Mat compute_M(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
              const TransitionStack& stack, const GainSet& gains, bool tf_free);

/// r = g_x (int Psi^T f_u K p_u dt) [+ k_tf c (phi_t + phi_x^T f + L) at tf]
///     [- K_g g in quasi-feasible mode].
Vec compute_r(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
              const TransitionStack& stack, const Mat& pu, const GainSet& gains, bool tf_free,
              MultiplierMode mode);

/// pi = -M^{-1} r. Throws SingularSystem when M is ill-conditioned.
Vec solve_pi(const PiSolveInputs& inputs);

/// du_i/dtau = -K (p_u(t_i) + f_u^T(t_i) psi_i g_x^T(tf) pi) at every node (N x m).
/// With q == 0, pi is empty and the constraint term is absent.
Mat control_rhs(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
                const TransitionStack& stack, const Mat& pu, const Vec& pi, const GainSet& gains);

/// Minimum admissible tf - t0; evaluating tf_rhs below it raises TfCollapse.
inline constexpr double kMinHorizon = 1e-3;

/// dtf/dtau = -k_tf (L + phi_t + phi_x^T f + pi^T (g_x f + g_t)) at tf.
double tf_rhs(const OcpProblem& p, const StateTrajectory& states, const ControlTrajectory& ctrl,
              const Vec& pi, const GainSet& gains);

/// The bracket of tf_rhs without the gain (the transversality expression).
double transversality_expression(const OcpProblem& p, const Vec& xf, const Vec& uf, double tf,
                                 const Vec& pi, const Vec& terminal_velocity);

Residuals optimality_residuals(const OcpProblem& p, const StateTrajectory& states,
                               const ControlTrajectory& ctrl, const TransitionStack& stack,
                               const Mat& pu, const Vec& pi);

/// lambda(t_i) = lt(t_i) + psi_i g_x^T(tf) pi, where lt comes from adjoint_sweep.
/// Satisfies L_u + f_u^T lambda = p_u + f_u^T Psi g_x^T pi at every node.
Mat reconstruct_costates(const OcpProblem& p, const StateTrajectory& states,
                         const TransitionStack& stack, const Mat& adjoint, const Vec& pi);

}  // namespace vem
