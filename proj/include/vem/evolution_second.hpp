#pragma once

#include <Eigen/Dense>

#include "vem/evolution_third.hpp"
#include "vem/ocp_model.hpp"
#include "vem/trajectory.hpp"

namespace vem {

/// Node states and controls of the second evolution equation. States are held
/// as an interpolating spline, so dx/dt at any time is the spline derivative.
struct SecondEqSnapshot {
  StateTrajectory states;
  ControlTrajectory controls;

  static SecondEqSnapshot make(const TimeGrid& grid, Mat states, Mat controls);

  const TimeGrid& grid() const { return states.grid(); }
  double tf() const { return states.grid().tf(); }
  /// dx/dt - f at every node (N x n).
  Mat defect(const OcpProblem& p) const;
};

/// Backward sweep behind pu_second (its lt values at the nodes).
Mat adjoint_second(const OcpProblem& p, const SecondEqSnapshot& snap, MultiplierMode mode,
                   const IntegratorOptions& opts);

/// Control gradient for the given mode. Feasible and quasi-feasible use the
/// f-based kernel; modified uses the dx/dt-based kernel, which differs from it
/// only through phi_xx (dx/dt - f).
Mat pu_second(const OcpProblem& p, const SecondEqSnapshot& snap, MultiplierMode mode,
              const IntegratorOptions& opts);

/// dx/dt at tf as seen by the multiplier and tf equations: f in the feasible
/// and quasi-feasible modes, the spline slope in modified mode.
Vec terminal_velocity_second(const OcpProblem& p, const SecondEqSnapshot& snap,
                             MultiplierMode mode);

/// Phi(tf, t0) K_x0 (x(t0) - x0) + integral Phi(tf, s) K_f (dx/ds - f) ds, the
/// infeasibility part of the modified r (premultiplied by g_x outside).
Vec infeasibility_drift(const OcpProblem& p, const SecondEqSnapshot& snap, const GainSet& gains,
                        const IntegratorOptions& opts);

/// pi = -M^{-1} r with M, r for the mode. In modified mode both use dx/dt at tf
/// and r gains -K_g g + g_x * infeasibility_drift.
Vec multiplier_second(const OcpProblem& p, const SecondEqSnapshot& snap,
                      const TransitionStack& stack, const Mat& pu, const GainSet& gains,
                      MultiplierMode mode, const IntegratorOptions& opts);

/// -K (pu + f_u^T psi g_x^T pi) at every node.
Mat control_rhs_second(const OcpProblem& p, const SecondEqSnapshot& snap,
                       const TransitionStack& stack, const Mat& pu, const Vec& pi,
                       const GainSet& gains);

/// dx/dtau at the nodes from w' = f_x w + f_u udot(t) [- K_f (dx/dt - f)],
/// w(t0) = 0 [or -K_x0 (x(t0) - x0)], bracketed terms in modified mode only.
/// udot(t) is the spline through control_rates.
Mat state_rhs_second(const OcpProblem& p, const SecondEqSnapshot& snap, const Mat& control_rates,
                     const GainSet& gains, MultiplierMode mode, const IntegratorOptions& opts);

/// The same quantity from the convolution integrals, with Gauss-Legendre
/// quadrature of the given order on every grid interval.
Mat state_rhs_convolution(const OcpProblem& p, const SecondEqSnapshot& snap,
                          const ForwardTransition& fwd, const Mat& control_rates,
                          const GainSet& gains, MultiplierMode mode, int gauss_points = 8);

/// -k_tf (L + phi_t + phi_x^T v + pi^T (g_x v + g_t)) at tf with v from
/// terminal_velocity_second. Throws TfCollapse below kMinHorizon.
double tf_rhs_second(const OcpProblem& p, const SecondEqSnapshot& snap, const Vec& pi,
                     const GainSet& gains, MultiplierMode mode);

}  // namespace vem
