#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vem/evolve_driver.hpp"
#include "vem/problems.hpp"

using namespace vem;

namespace {
SystemConfig config_for(const Benchmark& b, Method method) {
  SystemConfig c;
  c.method = method;
  c.N = b.N;
  c.gains = b.gains;
  return c;
}
}  // namespace

TEST_CASE("method and mode names") {
  CHECK(parse_method("second") == Method::second);
  CHECK(parse_method("third") == Method::third);
  CHECK_FALSE(parse_method("fourth").has_value());
  CHECK(parse_mode("quasi-feasible") == MultiplierMode::quasi_feasible);
  CHECK(parse_mode("modified") == MultiplierMode::modified);
  CHECK(to_string(Method::second) == "second");
  CHECK(to_string(MultiplierMode::feasible) == "feasible");
}

TEST_CASE("assemble_ivp: IVP dimensions") {
  const Benchmark di = double_integrator();
  const Benchmark br = brachistochrone();
  CHECK(assemble_ivp(di.problem, config_for(di, Method::third)).dimension() == 41);
  CHECK(assemble_ivp(di.problem, config_for(di, Method::second)).dimension() == 123);
  CHECK(assemble_ivp(br.problem, config_for(br, Method::third)).dimension() == 102);
  CHECK(assemble_ivp(br.problem, config_for(br, Method::second)).dimension() == 405);
}

TEST_CASE("assemble_ivp: the modified mode needs the second equation") {
  const Benchmark di = double_integrator();
  SystemConfig c = config_for(di, Method::third);
  c.mode = MultiplierMode::modified;
  CHECK_THROWS_AS(assemble_ivp(di.problem, c), Error);
  c.method = Method::second;
  CHECK_NOTHROW(assemble_ivp(di.problem, c));
}

TEST_CASE("EvolutionLayout: pack and unpack round trip") {
  const EvolutionLayout layout{Method::second, 5, 3, 1, true, 0.0};
  EvolutionLayout::Parts parts;
  parts.states = Mat::Random(5, 3);
  parts.controls = Mat::Random(5, 1);
  parts.tf = 0.77;
  const Vec z = layout.pack(parts);
  CHECK(z.size() == layout.dimension());
  CHECK(z.size() == 21);
  CHECK(z(0) == parts.states(0, 0));
  CHECK(z(3) == parts.states(1, 0));
  const EvolutionLayout::Parts back = layout.unpack(z);
  CHECK(back.states == parts.states);
  CHECK(back.controls == parts.controls);
  CHECK(back.tf == 0.77);
  CHECK_THROWS_AS(layout.unpack(Vec::Zero(20)), Error);
}

TEST_CASE("the initial RHS of the third equation from zero control") {
  const Benchmark di = double_integrator();
  const EvolutionSystem sys = assemble_ivp(di.problem, config_for(di, Method::third));
  const Evaluation ev = sys.evaluate(sys.initial_state(), true);
  const Eigen::Vector2d pi = oracle::di_initial_pi(41, 0.1, 0.1);
  CHECK((ev.pi - Vec(pi)).cwiseAbs().maxCoeff() <= 1e-9);
  for (int i = 0; i < 41; ++i) {
    const double t = 2.0 * i / 40.0;
    CHECK(ev.control_rate(i, 0) == doctest::Approx(-0.1 * (pi(1) + (2.0 - t) * pi(0))));
  }
  CHECK(ev.residuals.constraint_inf == doctest::Approx(3.0));
  CHECK(ev.J == 0.0);
}

TEST_CASE("performance_index is exact for the quadratic running cost") {
  const Benchmark di = double_integrator();
  const TimeGrid grid(41, 0.0, 2.0);
  Mat U(41, 1), X(41, 2);
  for (int i = 0; i < 41; ++i) {
    U(i, 0) = oracle::di_u(grid.time(i));
    X.row(i) = oracle::di_x(grid.time(i)).transpose();
  }
  CHECK(performance_index(di.problem, grid, X, U) == doctest::Approx(3.25).epsilon(1e-13));
}

TEST_CASE("evolve: zero horizon keeps the initial snapshot only") {
  const Benchmark di = double_integrator();
  const EvolutionSystem sys = assemble_ivp(di.problem, config_for(di, Method::third));
  EvolveOptions o;
  o.tau_end = 0.0;
  const EvolutionHistory h = evolve(sys, o);
  REQUIRE(h.snapshots.size() == 1);
  CHECK(h.snapshots[0].tau == 0.0);
  CHECK(h.termination == "tau_end");
  CHECK(h.snapshots[0].controls.isZero(0.0));
}

TEST_CASE("evolve: double integrator, third equation, to tau = 300") {
  const Benchmark di = double_integrator();
  const EvolutionSystem sys = assemble_ivp(di.problem, config_for(di, Method::third));
  EvolveOptions o;
  o.early_stop = false;
  const EvolutionHistory h = evolve(sys, o);
  CHECK(h.termination == "tau_end");
  CHECK(h.snapshots.size() == default_snapshot_taus().size());
  for (std::size_t i = 0; i < h.snapshots.size(); ++i) {
    CHECK(h.snapshots[i].tau == doctest::Approx(default_snapshot_taus()[i]));
  }
  const SolveReport rep = summarize(sys, h, di.reference);
  CHECK(std::abs(rep.J - 3.25) <= 1e-4);
  // Within an order of magnitude of the reference error level 4.8511e-6.
  CHECK(rep.e_J >= 4.8511e-7);
  CHECK(rep.e_J <= 4.8511e-5);
  CHECK(rep.e_u(0) <= 1e-3);
  REQUIRE(rep.e_lambda.has_value());
  CHECK(*rep.e_lambda <= 1e-2);
  CHECK(rep.dimension == 41);
  for (const TracePoint& t : h.trace) CHECK(t.J <= 3.25 + 1e-6);
}

TEST_CASE("evolve: brachistochrone, third equation") {
  const Benchmark br = brachistochrone();
  const EvolutionSystem sys = assemble_ivp(br.problem, config_for(br, Method::third));
  EvolveOptions o;
  o.early_stop = false;
  const EvolutionHistory h = evolve(sys, o);
  const SolveReport rep = summarize(sys, h, br.reference);
  CHECK(std::abs(rep.tf - 0.8165) <= 5e-4);
  REQUIRE(rep.e_tf.has_value());
  CHECK(*rep.e_tf <= 1e-4);
  // tf first drops below its final value quickly, then settles.
  CHECK(h.trace.front().tf == 1.0);
  CHECK(h.trace[1].tf < 1.0);
}

TEST_CASE("evolve: early stop honours the residual thresholds") {
  const Benchmark di = double_integrator();
  const EvolutionSystem sys = assemble_ivp(di.problem, config_for(di, Method::third));
  EvolveOptions o;
  o.stop_tol = 1e-2;
  const EvolutionHistory h = evolve(sys, o);
  CHECK(h.termination == "converged");
  const Residuals& r = h.trace.back().residuals;
  CHECK(r.constraint_inf <= 1e-2);
  CHECK(h.final_snapshot().tau == h.trace.back().tau);
}

TEST_CASE("evolve: failures are reported, not thrown") {
  Benchmark di = double_integrator();
  // Dynamics turn non-finite once any control exceeds 1, which the evolution reaches.
  di.problem.dynamics = [](const Vec& x, const Vec& u, double) {
    const double v = std::abs(u(0)) > 1.0 ? std::nan("") : u(0);
    return Vec{{x(1), v}};
  };
  const EvolutionSystem sys = assemble_ivp(di.problem, config_for(di, Method::third));
  EvolveOptions o;
  o.early_stop = false;
  const EvolutionHistory h = evolve(sys, o);
  REQUIRE(h.failure.has_value());
  CHECK(h.termination == "failure");
  CHECK(h.failure->tau > 0.0);
  CHECK(h.snapshots.front().tau == 0.0);
}

TEST_CASE("summarize: the exact solution has no error beyond the discretization floor") {
  const Benchmark di = double_integrator();
  SystemConfig c = config_for(di, Method::third);
  Mat U(41, 1);
  for (int i = 0; i < 41; ++i) U(i, 0) = oracle::di_u(2.0 * i / 40.0);
  c.init_controls = U;
  const EvolutionSystem sys = assemble_ivp(di.problem, c);
  EvolveOptions o;
  o.tau_end = 0.0;
  const SolveReport rep = summarize(sys, evolve(sys, o), di.reference);
  CHECK(rep.e_J <= 1e-6);
  CHECK(rep.e_u(0) <= 1e-6);
  CHECK(rep.e_x.maxCoeff() <= 1e-6);
}

TEST_CASE("evolve is deterministic") {
  const Benchmark br = brachistochrone();
  const EvolutionSystem sys = assemble_ivp(br.problem, config_for(br, Method::second));
  EvolveOptions o;
  o.tau_end = 30.0;
  const EvolutionHistory a = evolve(sys, o);
  const EvolutionHistory b = evolve(sys, o);
  REQUIRE(a.trace.size() == b.trace.size());
  CHECK(a.final_snapshot().controls == b.final_snapshot().controls);
  CHECK(a.final_snapshot().tf == b.final_snapshot().tf);
}
