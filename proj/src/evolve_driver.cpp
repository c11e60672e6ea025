#include "vem/evolve_driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "vem/numerics/quadrature.hpp"

namespace vem {

std::string to_string(Method method) { return method == Method::second ? "second" : "third"; }

std::string to_string(MultiplierMode mode) {
  switch (mode) {
    case MultiplierMode::feasible: return "feasible";
    case MultiplierMode::quasi_feasible: return "quasi-feasible";
    case MultiplierMode::modified: return "modified";
  }
  return "quasi-feasible";
}

std::optional<Method> parse_method(const std::string& text) {
  if (text == "second") return Method::second;
  if (text == "third") return Method::third;
  return std::nullopt;
}

std::optional<MultiplierMode> parse_mode(const std::string& text) {
  if (text == "feasible") return MultiplierMode::feasible;
  if (text == "quasi-feasible" || text == "quasi") return MultiplierMode::quasi_feasible;
  if (text == "modified") return MultiplierMode::modified;
  return std::nullopt;
}

int EvolutionLayout::dimension() const {
  const int per_node = method == Method::second ? n + m : m;
  return N * per_node + (tf_free ? 1 : 0);
}

Vec EvolutionLayout::pack(const Parts& parts) const {
  const bool second = method == Method::second;
  if (parts.controls.rows() != N || parts.controls.cols() != m ||
      (second && (parts.states.rows() != N || parts.states.cols() != n))) {
    raise(ErrorCode::dimension_mismatch, "pack: node blocks do not match the layout");
  }
  Vec z(dimension());
  int k = 0;
  if (second) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < n; ++j) z(k++) = parts.states(i, j);
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < m; ++j) z(k++) = parts.controls(i, j);
  if (tf_free) z(k) = parts.tf;
  return z;
}

EvolutionLayout::Parts EvolutionLayout::unpack(const Vec& z) const {
  if (z.size() != dimension()) {
    raise(ErrorCode::dimension_mismatch, "unpack: expected " + std::to_string(dimension()) +
                                             " entries, got " + std::to_string(z.size()));
  }
  Parts parts;
  int k = 0;
  if (method == Method::second) {
    parts.states.resize(N, n);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < n; ++j) parts.states(i, j) = z(k++);
  } else {
    parts.states.resize(0, n);
  }
  parts.controls.resize(N, m);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < m; ++j) parts.controls(i, j) = z(k++);
  parts.tf = tf_free ? z(k) : fixed_tf;
  return parts;
}

double performance_index(const OcpProblem& p, const TimeGrid& grid, const Mat& states,
                         const Mat& controls) {
  const int last = grid.size() - 1;
  double J = p.phi(states.row(last).transpose(), grid.tf());
  if (p.has_running_cost()) {
    std::vector<double> samples(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) {
      samples[static_cast<std::size_t>(i)] =
          p.L(states.row(i).transpose(), controls.row(i).transpose(), grid.time(i));
    }
    J += simpson_quadrature(grid.span(), samples);
  }
  return J;
}

namespace {

TimeGrid grid_for(const OcpProblem& p, int N, double tf) {
  if (p.tf_mode.free && tf - p.t0 < kMinHorizon) {
    raise(ErrorCode::tf_collapse, "terminal time collapsed to tf - t0 = " + std::to_string(tf - p.t0));
  }
  return TimeGrid(N, p.t0, tf);
}

}  // namespace

EvolutionSystem::EvolutionSystem(OcpProblem problem, SystemConfig config)
    : problem_(std::move(problem)), config_(std::move(config)) {
  const OcpProblem& p = problem_;
  if (config_.N < 4) raise(ErrorCode::degenerate_grid, "N must be at least 4");
  if (config_.method == Method::third && config_.mode == MultiplierMode::modified) {
    raise(ErrorCode::invalid_argument, "the modified mode applies to the second equation only");
  }
  config_.gains.validate(p.n, p.m, p.q, p.tf_mode.free);
  config_.inner.validate();

  layout_ = EvolutionLayout{config_.method, config_.N, p.n, p.m, p.tf_mode.free, p.tf_mode.value};

  EvolutionLayout::Parts parts;
  parts.tf = config_.init_tf.value_or(p.tf_mode.value);
  if (!p.tf_mode.free && config_.init_tf && *config_.init_tf != p.tf_mode.value) {
    raise(ErrorCode::invalid_argument, "init_tf given for a fixed terminal time");
  }
  parts.controls = config_.init_controls.value_or(Mat::Zero(config_.N, p.m));
  if (parts.controls.rows() != config_.N || parts.controls.cols() != p.m) {
    raise(ErrorCode::dimension_mismatch, "initial controls must be N x m");
  }
  if (config_.method == Method::second) {
    if (config_.init_states) {
      parts.states = *config_.init_states;
    } else {
      const ControlTrajectory ctrl(grid_for(p, config_.N, parts.tf), parts.controls);
      parts.states = propagate_states(p, ctrl, config_.inner).values();
    }
  } else if (config_.init_states) {
    raise(ErrorCode::invalid_argument, "initial states apply to the second equation only");
  }
  z0_ = layout_.pack(parts);
}

Vec EvolutionSystem::rhs(double, const Vec& z) const { return evaluate(z, false).rate; }

Evaluation EvolutionSystem::evaluate(const Vec& z, bool diagnostics) const {
  const EvolutionLayout::Parts parts = layout_.unpack(z);
  Evaluation ev = config_.method == Method::third ? evaluate_third(parts, diagnostics)
                                                  : evaluate_second(parts, diagnostics);
  EvolutionLayout::Parts rates{ev.state_rate, ev.control_rate, ev.tf_rate};
  ev.rate = layout_.pack(rates);
  return ev;
}

Evaluation EvolutionSystem::evaluate_third(const EvolutionLayout::Parts& parts,
                                           bool diagnostics) const {
  const OcpProblem& p = problem_;
  const GainSet& gains = config_.gains;
  const IntegratorOptions& opts = config_.inner;
  const bool tf_free = p.tf_mode.free;

  const TimeGrid grid = grid_for(p, config_.N, parts.tf);
  const ControlTrajectory ctrl(grid, parts.controls);
  const StateTrajectory states = propagate_states(p, ctrl, opts);
  const TransitionStack stack = transition_stack(p, states, ctrl, opts);
  const Mat adjoint = adjoint_sweep(p, states, ctrl, opts);

  Evaluation ev;
  ev.tf = grid.tf();
  ev.states = states.values();
  ev.controls = parts.controls;
  ev.state_rate.resize(0, p.n);
  ev.pu = pu_from_adjoint(p, states, ctrl, adjoint);
  ev.pi = Vec::Zero(0);
  if (p.q > 0) {
    PiSolveInputs in;
    in.mode = config_.mode;
    in.M = compute_M(p, states, ctrl, stack, gains, tf_free);
    in.r = compute_r(p, states, ctrl, stack, ev.pu, gains, tf_free, config_.mode);
    ev.pi = solve_pi(in);
  }
  ev.control_rate = control_rhs(p, states, ctrl, stack, ev.pu, ev.pi, gains);
  if (tf_free) ev.tf_rate = tf_rhs(p, states, ctrl, ev.pi, gains);

  if (diagnostics) {
    ev.residuals = optimality_residuals(p, states, ctrl, stack, ev.pu, ev.pi);
    ev.costates = reconstruct_costates(p, states, stack, adjoint, ev.pi);
    ev.J = performance_index(p, grid, ev.states, ev.controls);
  }
  return ev;
}

Evaluation EvolutionSystem::evaluate_second(const EvolutionLayout::Parts& parts,
                                            bool diagnostics) const {
  const OcpProblem& p = problem_;
  const GainSet& gains = config_.gains;
  const IntegratorOptions& opts = config_.inner;
  const MultiplierMode mode = config_.mode;

  const TimeGrid grid = grid_for(p, config_.N, parts.tf);
  const SecondEqSnapshot snap = SecondEqSnapshot::make(grid, parts.states, parts.controls);
  const TransitionStack stack = transition_stack(p, snap.states, snap.controls, opts);
  const Mat adjoint = adjoint_second(p, snap, mode, opts);

  Evaluation ev;
  ev.tf = grid.tf();
  ev.states = parts.states;
  ev.controls = parts.controls;
  ev.pu = pu_from_adjoint(p, snap.states, snap.controls, adjoint);
  ev.pi = multiplier_second(p, snap, stack, ev.pu, gains, mode, opts);
  ev.control_rate = control_rhs_second(p, snap, stack, ev.pu, ev.pi, gains);
  ev.state_rate = state_rhs_second(p, snap, ev.control_rate, gains, mode, opts);
  if (p.tf_mode.free) {
    ev.tf_rate = tf_rhs_second(p, snap, ev.pi, gains, mode);
    // Nodes sit at fixed sigma and move with tf; the rates above hold at fixed t.
    const bool modified = mode == MultiplierMode::modified;
    for (int i = 0; i < grid.size(); ++i) {
      const double t = grid.time(i);
      const double s = grid.sigma()[static_cast<std::size_t>(i)] * ev.tf_rate;
      const Vec v = modified ? snap.states.node_slope(i)
                             : p.f(snap.states.node(i), snap.controls.node(i), t);
      ev.state_rate.row(i) += s * v.transpose();
      ev.control_rate.row(i) += s * snap.controls.slope(t).transpose();
    }
  }

  if (diagnostics) {
    ev.residuals = optimality_residuals(p, snap.states, snap.controls, stack, ev.pu, ev.pi);
    ev.costates = reconstruct_costates(p, snap.states, stack, adjoint, ev.pi);
    ev.J = performance_index(p, grid, ev.states, ev.controls);
  }
  return ev;
}

EvolutionSystem assemble_ivp(const OcpProblem& p, const SystemConfig& config) {
  EvolutionSystem system(p, config);
  system.rhs(0.0, system.initial_state());
  return system;
}

std::vector<double> default_snapshot_taus() { return {0.0, 1.0, 5.0, 10.0, 30.0, 100.0, 300.0}; }

namespace {

Snapshot make_snapshot(const EvolutionSystem& system, double tau, const Evaluation& ev) {
  const TimeGrid grid(system.layout().N, system.problem().t0, ev.tf);
  Snapshot s;
  s.tau = tau;
  s.tf = ev.tf;
  s.times = Eigen::Map<const Vec>(grid.times().data(), grid.size());
  s.states = ev.states;
  s.controls = ev.controls;
  s.costates = ev.costates;
  s.pi = ev.pi;
  s.J = ev.J;
  s.residuals = ev.residuals;
  return s;
}

TracePoint make_trace(double tau, const Evaluation& ev) {
  return TracePoint{tau, ev.J, ev.tf, ev.pi, ev.residuals};
}

}  // namespace

EvolutionHistory evolve(const EvolutionSystem& system, const EvolveOptions& options) {
  if (!(options.tau_end >= 0.0) || !std::isfinite(options.tau_end)) {
    raise(ErrorCode::invalid_argument, "tau_end must be finite and non-negative");
  }
  std::vector<double> taus;
  for (double t : options.snapshot_taus) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      raise(ErrorCode::invalid_argument, "snapshot tau " + std::to_string(t) + " is negative");
    }
    if (t > 0.0 && t < options.tau_end) taus.push_back(t);
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  const auto clock_start = std::chrono::steady_clock::now();
  EvolutionHistory history;
  history.layout = system.layout();

  double pu0_inf = 0.0;
  double tau_now = 0.0;
  Vec z_now = system.initial_state();
  std::size_t next = 0;
  bool converged = false;

  const auto converged_at = [&](const Evaluation& ev) {
    const Residuals& r = ev.residuals;
    return r.optimality_inf <= options.stop_tol * (1.0 + pu0_inf) &&
           r.constraint_inf <= options.stop_tol && r.transversality <= options.stop_tol;
  };

  try {
    const Evaluation ev0 = system.evaluate(z_now, true);
    pu0_inf = ev0.pu.size() > 0 ? ev0.pu.cwiseAbs().maxCoeff() : 0.0;
    history.snapshots.push_back(make_snapshot(system, 0.0, ev0));
    history.trace.push_back(make_trace(0.0, ev0));

    const VectorField field = [&](double tau, const Vec& z) { return system.rhs(tau, z); };
    const StepObserver observer = [&](const StepSegment& seg, const Vec& y_end) {
      const double t_end = seg.t_end();
      while (next < taus.size() && taus[next] <= t_end) {
        const double tau = taus[next++];
        const Vec z = tau == t_end ? y_end : seg.eval(tau);
        history.snapshots.push_back(make_snapshot(system, tau, system.evaluate(z, true)));
      }
      const Evaluation ev = system.evaluate(y_end, true);
      history.trace.push_back(make_trace(t_end, ev));
      tau_now = t_end;
      z_now = y_end;
      if (options.early_stop && converged_at(ev)) {
        converged = true;
        return false;
      }
      return true;
    };

    if (options.tau_end > 0.0) {
      const IntegrationOutcome out =
          rk45_drive(field, z_now, 0.0, options.tau_end, options.opts, observer);
      history.stats = out.stats;
    }
    if (history.snapshots.back().tau != tau_now) {
      history.snapshots.push_back(make_snapshot(system, tau_now, system.evaluate(z_now, true)));
    }
    history.termination = converged ? "converged" : "tau_end";
  } catch (const Error& e) {
    history.failure = EvolutionFailure{e.code(), e.what(), tau_now};
    history.termination = "failure";
  }
  history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return history;
}

SolveReport summarize(const EvolutionSystem& system, const EvolutionHistory& history,
                      const std::optional<Reference>& reference) {
  const OcpProblem& p = system.problem();
  SolveReport rep;
  rep.problem = p.name;
  rep.method = system.config().method;
  rep.mode = system.config().mode;
  rep.N = system.layout().N;
  rep.dimension = system.dimension();
  rep.termination = history.termination;
  rep.wall_seconds = history.wall_seconds;
  rep.stats = history.stats;
  rep.e_u = Vec::Zero(p.m);
  rep.e_x = Vec::Zero(p.n);
  if (history.snapshots.empty()) return rep;

  const Snapshot& s = history.final_snapshot();
  rep.tau_final = s.tau;
  rep.J = s.J;
  rep.tf = s.tf;
  rep.pi = s.pi;
  rep.residuals = s.residuals;
  if (!reference) return rep;

  const Reference& ref = *reference;
  double e_lambda = 0.0;
  for (int i = 0; i < s.times.size(); ++i) {
    const double t = s.times(i);
    if (ref.u) {
      rep.e_u = rep.e_u.cwiseMax((s.controls.row(i).transpose() - ref.u(t)).cwiseAbs());
    }
    if (ref.x) {
      rep.e_x = rep.e_x.cwiseMax((s.states.row(i).transpose() - ref.x(t)).cwiseAbs());
    }
    if (ref.lambda && s.costates.rows() == s.times.size()) {
      e_lambda = std::max(e_lambda,
                          (s.costates.row(i).transpose() - ref.lambda(t)).cwiseAbs().maxCoeff());
    }
  }
  if (ref.lambda) rep.e_lambda = e_lambda;
  if (ref.J) rep.e_J = std::abs(s.J - *ref.J);
  if (ref.tf) rep.e_tf = std::abs(s.tf - *ref.tf);
  if (ref.pi.size() > 0 && ref.pi.size() == s.pi.size()) {
    rep.e_pi = (s.pi - ref.pi).cwiseAbs().maxCoeff();
  }
  return rep;
}

}  // namespace vem
