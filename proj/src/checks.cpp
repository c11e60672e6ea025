#include "vem/checks.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "vem/evolution_second.hpp"
#include "vem/evolution_third.hpp"
#include "vem/evolve_driver.hpp"
#include "vem/numerics/linear_solve.hpp"
#include "vem/numerics/spline.hpp"
#include "vem/problems.hpp"
#include "vem/trajectory.hpp"

namespace vem::checks {
namespace {

IntegratorOptions tight() {
  IntegratorOptions o;
  o.rtol = 1e-10;
  o.atol = 1e-12;
  return o;
}

CheckResult verdict(std::string name, double value, double tolerance, std::string detail = {}) {
  const bool ok = std::isfinite(value) && value <= tolerance;
  return CheckResult{std::move(name), value, tolerance, ok, std::move(detail)};
}

double max_abs(const Mat& a, const Mat& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

// Smooth random control a + b t + c sin(w t) sampled on the grid.
Mat smooth_controls(const TimeGrid& grid, int m, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> coef(-scale, scale);
  Mat U(grid.size(), m);
  for (int j = 0; j < m; ++j) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), w = 1.0 + std::abs(coef(rng));
    for (int i = 0; i < grid.size(); ++i) {
      const double t = grid.time(i);
      U(i, j) = a + b * t + c * std::sin(w * t);
    }
  }
  return U;
}

}  // namespace

OcpProblem weighted_double_integrator() {
  OcpProblem p = double_integrator().problem;
  p.name = "weighted-double-integrator";
  p.q = 0;
  p.terminal_constraint = nullptr;
  p.jac_gx = nullptr;
  p.deriv_gt = nullptr;
  p.running_cost = [](const Vec& x, const Vec& u, double) {
    return 0.5 * (u(0) * u(0) + x(0) * x(0));
  };
  p.grad_Lx = [](const Vec& x, const Vec&, double) { return Vec{{x(0), 0.0}}; };
  p.grad_Lu = [](const Vec&, const Vec& u, double) { return Vec{{u(0)}}; };
  p.terminal_cost = [](const Vec& xf, double) { return 0.5 * xf.squaredNorm(); };
  p.grad_phix = [](const Vec& xf, double) { return xf; };
  p.deriv_phit = [](const Vec&, double) { return 0.0; };
  p.hess_phixx = [](const Vec&, double) { return Mat(Mat::Identity(2, 2)); };
  p.deriv_phixt = [](const Vec&, double) { return Vec(Vec::Zero(2)); };
  return p;
}

CheckResult pu_form_equivalence(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> horizon(0.7, 1.2);
  struct Case {
    OcpProblem problem;
    int N;
    double scale;
  };
  std::vector<Case> cases{{double_integrator().problem, 401, 2.0},
                          {brachistochrone().problem, 401, 0.8},
                          {weighted_double_integrator(), 4001, 1.0}};
  double worst = 0.0;
  for (const Case& c : cases) {
    for (int trial = 0; trial < 10; ++trial) {
      const double tf = c.problem.tf_mode.free ? horizon(rng) : c.problem.tf_mode.value;
      const TimeGrid grid(c.N, c.problem.t0, tf);
      const ControlTrajectory ctrl(grid, smooth_controls(grid, c.problem.m, rng, c.scale));
      const StateTrajectory states = propagate_states(c.problem, ctrl, tight());
      const Mat adjoint_form = compute_pu(c.problem, states, ctrl, tight());
      const ForwardTransition fwd(c.problem, states, ctrl, tight());
      const Mat kernel_form = compute_pu_quadrature(c.problem, states, ctrl, fwd);
      const double scale = 1.0 + adjoint_form.cwiseAbs().maxCoeff();
      worst = std::max(worst, max_abs(adjoint_form, kernel_form) / scale);
    }
  }
  return verdict("p_u kernel form vs adjoint sweep", worst, 1e-6,
                 "relative to 1 + |p_u|, 10 controls per problem");
}

CheckResult transition_consistency(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> horizon(0.7, 1.2);
  double worst = 0.0;
  for (const Benchmark& b : {double_integrator(), brachistochrone()}) {
    const OcpProblem& p = b.problem;
    const double tf = p.tf_mode.free ? horizon(rng) : p.tf_mode.value;
    const TimeGrid grid(b.N, p.t0, tf);
    const ControlTrajectory ctrl(grid, smooth_controls(grid, p.m, rng, 0.8));
    const StateTrajectory states = propagate_states(p, ctrl, tight());
    const TransitionStack stack = transition_stack(p, states, ctrl, tight());
    const ForwardTransition fwd(p, states, ctrl, tight());
    const int last = grid.size() - 1;
    for (int i = 0; i < grid.size(); ++i) {
      const Mat forward = phi_between(fwd, last, i).transpose();
      worst = std::max(worst, max_abs(stack.psi[static_cast<std::size_t>(i)], forward));
    }
  }
  return verdict("backward Psi vs forward Phi(tf, t)^T", worst, 1e-7, "both benchmarks");
}

CheckResult convolution_equivalence(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Benchmark b = double_integrator();
  const OcpProblem& p = b.problem;
  const TimeGrid grid(b.N, p.t0, p.tf_mode.value);
  const ControlTrajectory ctrl(grid, smooth_controls(grid, p.m, rng, 2.0));
  const Mat X = propagate_states(p, ctrl, tight()).values();
  const SecondEqSnapshot snap = SecondEqSnapshot::make(grid, X, ctrl.values());

  std::uniform_real_distribution<double> rate(-1.0, 1.0);
  Mat rates(grid.size(), p.m);
  for (int i = 0; i < rates.rows(); ++i) rates(i, 0) = rate(rng);

  const Mat ode = state_rhs_second(p, snap, rates, b.gains, MultiplierMode::feasible, tight());
  const ForwardTransition fwd(p, snap.states, snap.controls, tight());
  const Mat conv =
      state_rhs_convolution(p, snap, fwd, rates, b.gains, MultiplierMode::feasible, 8);
  return verdict("state rate: variational IVP vs convolution", max_abs(ode, conv), 1e-6,
                 "double integrator, random control rates");
}

CheckResult mode_reduction_chain(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  const double a = coef(rng);
  const double c = coef(rng);
  // u = a + c t keeps x cubic, which the state spline reproduces exactly.
  const auto x_exact = [a, c](double t) {
    return Vec{{1.0 + t + a * t * t / 2.0 + c * t * t * t / 6.0, 1.0 + a * t + c * t * t / 2.0}};
  };

  Benchmark b = double_integrator();
  OcpProblem& p = b.problem;
  const Vec target = x_exact(p.tf_mode.value);
  p.terminal_constraint = [target](const Vec& xf, double) { return Vec(xf - target); };

  const TimeGrid grid(b.N, p.t0, p.tf_mode.value);
  Mat X(grid.size(), p.n);
  Mat U(grid.size(), p.m);
  for (int i = 0; i < grid.size(); ++i) {
    X.row(i) = x_exact(grid.time(i)).transpose();
    U(i, 0) = a + c * grid.time(i);
  }
  const SecondEqSnapshot snap = SecondEqSnapshot::make(grid, X, U);
  const TransitionStack stack = transition_stack(p, snap.states, snap.controls, tight());

  struct Rates {
    Vec pi;
    Mat u_rate;
    Mat x_rate;
  };
  const auto rates_for = [&](MultiplierMode mode) {
    const Mat pu = pu_second(p, snap, mode, tight());
    Rates r;
    r.pi = multiplier_second(p, snap, stack, pu, b.gains, mode, tight());
    r.u_rate = control_rhs_second(p, snap, stack, pu, r.pi, b.gains);
    r.x_rate = state_rhs_second(p, snap, r.u_rate, b.gains, mode, tight());
    return r;
  };
  const Rates modified = rates_for(MultiplierMode::modified);
  const Rates quasi = rates_for(MultiplierMode::quasi_feasible);
  const Rates feasible = rates_for(MultiplierMode::feasible);
  const auto gap = [](const Rates& l, const Rates& r) {
    return std::max({max_abs(l.pi, r.pi), max_abs(l.u_rate, r.u_rate), max_abs(l.x_rate, r.x_rate)});
  };
  const double worst = std::max(gap(modified, quasi), gap(quasi, feasible));
  return verdict("modified -> quasi-feasible -> feasible reduction", worst, 1e-9,
                 "defect-free double integrator snapshot");
}

CheckResult integrator_order() {
  const VectorField field = [](double t, const Vec& y) { return Vec(std::cos(t) * y); };
  const Vec y0 = Vec::Ones(1);
  const double exact = std::exp(std::sin(2.0));
  const double e1 = std::abs(rk45_fixed(field, y0, 0.0, 2.0, 10)(0) - exact);
  const double e2 = std::abs(rk45_fixed(field, y0, 0.0, 2.0, 20)(0) - exact);
  const double order = std::log2(e1 / e2);
  std::ostringstream detail;
  detail << "errors " << e1 << " -> " << e2 << " on halving the step";
  const bool ok = std::isfinite(order) && order >= 4.0;
  return CheckResult{"integrator observed order", order, 4.0, ok, detail.str()};
}

CheckResult spline_cubic_reproduction(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::vector<double> nodes{0.0};
  for (int i = 0; i < 11; ++i) nodes.push_back(nodes.back() + 0.05 + unit(rng) * 0.15);
  const double c0 = coef(rng), c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
  const auto cubic = [&](double t) { return c0 + t * (c1 + t * (c2 + t * c3)); };
  Mat values(static_cast<Eigen::Index>(nodes.size()), 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) values(static_cast<Eigen::Index>(i), 0) = cubic(nodes[i]);
  const SplineCoeffs s = spline_build(nodes, values);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double t = nodes.front() + unit(rng) * (nodes.back() - nodes.front());
    worst = std::max(worst, std::abs(s.eval(t, 0) - cubic(t)));
  }
  return verdict("not-a-knot spline reproduces cubics", worst, 1e-12);
}

CheckResult stationarity_at_optimum() {
  const Benchmark b = double_integrator();
  SystemConfig cfg;
  cfg.method = Method::third;
  cfg.N = b.N;
  cfg.gains = b.gains;
  const TimeGrid grid(b.N, b.problem.t0, b.problem.tf_mode.value);
  Mat U(grid.size(), 1);
  for (int i = 0; i < grid.size(); ++i) U(i, 0) = b.reference.u(grid.time(i))(0);
  cfg.init_controls = U;
  const EvolutionSystem system(b.problem, cfg);
  const Evaluation ev = system.evaluate(system.initial_state(), false);
  return verdict("control rate at the analytic optimum", ev.control_rate.cwiseAbs().maxCoeff(),
                 1e-4, "double integrator, third equation");
}

CheckResult dense_solve_residual(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int n = 6;
  Mat A(n, n);
  Vec rhs(n);
  for (int i = 0; i < n; ++i) {
    rhs(i) = normal(rng);
    for (int j = 0; j < n; ++j) A(i, j) = normal(rng);
  }
  const Mat M = A * A.transpose() + 0.1 * Mat::Identity(n, n);
  const Vec x = solve_dense(M, rhs).x;
  return verdict("dense solve relative residual", (M * x - rhs).norm() / rhs.norm(), 1e-10);
}

std::vector<CheckResult> derivative_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  std::vector<OcpProblem> problems;
  for (const std::string& name : benchmark_names()) problems.push_back(find_benchmark(name)->problem);
  problems.push_back(weighted_double_integrator());

  std::vector<CheckResult> out;
  for (const OcpProblem& p : problems) {
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      Vec x(p.n);
      Vec u(p.m);
      for (int i = 0; i < p.n; ++i) x(i) = coord(rng);
      for (int i = 0; i < p.m; ++i) u(i) = coord(rng);
      const double t = p.t0 + std::abs(coord(rng));
      worst = std::max(worst, check_derivatives(p, x, u, t, 1e-5).worst());
    }
    out.push_back(verdict("derivatives: " + p.name, worst, 1e-6, "central differences, h = 1e-5"));
  }
  return out;
}

std::vector<CheckResult> invariant_suite(std::uint64_t seed) {
  return {pu_form_equivalence(seed),     transition_consistency(seed + 1),
          convolution_equivalence(seed + 2), mode_reduction_chain(seed + 3),
          integrator_order(),            spline_cubic_reproduction(seed + 4),
          stationarity_at_optimum(),     dense_solve_residual(seed + 5)};
}

}  // namespace vem::checks
