#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vem/problems.hpp"

using namespace vem;

TEST_CASE("double integrator reference") {
  const Benchmark b = double_integrator();
  CHECK(b.reference.u(0.0)(0) == -3.5);
  CHECK(b.reference.u(2.0)(0) == 2.5);
  CHECK(b.reference.x(2.0).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(*b.reference.J == 3.25);
  CHECK(b.N == 41);
  CHECK(b.problem.n == 2);
  CHECK(b.problem.q == 2);
  CHECK_FALSE(b.problem.tf_mode.free);
  // Reference satisfies x' = f and the stationarity condition u = -f_u^T lambda.
  for (double t : {0.1, 0.9, 1.7}) {
    const Vec x = b.reference.x(t);
    const double h = 1e-6;
    const Vec xdot = (b.reference.x(t + h) - b.reference.x(t - h)) / (2 * h);
    CHECK((xdot - b.problem.f(x, b.reference.u(t), t)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(b.reference.u(t)(0) + b.reference.lambda(t)(1) == doctest::Approx(0.0));
  }
}

TEST_CASE("cycloid oracle against an independent root solve") {
  const oracle::Cycloid o = oracle::cycloid();
  const Cycloid c = cycloid_through(2.0, 2.0, 10.0);
  CHECK(c.theta_f == doctest::Approx(o.theta_f).epsilon(1e-12));
  CHECK(c.radius == doctest::Approx(o.a).epsilon(1e-12));
  CHECK(c.tf == doctest::Approx(o.tf).epsilon(1e-12));
  CHECK(std::abs(c.tf - 0.8165) <= 5e-4);
  CHECK(c.tf == doctest::Approx(0.81646989616).epsilon(1e-10));
  const Vec xf = c.state(c.tf);
  CHECK(xf(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(xf(1) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(xf(2) == doctest::Approx(std::sqrt(40.0)).epsilon(1e-12));
  CHECK(std::sqrt(40.0) == doctest::Approx(6.3246).epsilon(1e-5));
}

TEST_CASE("cycloid multipliers") {
  const Cycloid c = cycloid_through(2.0, 2.0, 10.0);
  const Vec pi = c.multipliers();
  CHECK(std::abs(pi(0) + 0.1477) <= 5e-5);
  CHECK(std::abs(pi(1) - 0.0564) <= 5e-5);
  const double uf = c.control(c.tf);
  CHECK(pi(0) == doctest::Approx(-std::sin(uf) / std::sqrt(40.0)));
  CHECK(pi(1) == doctest::Approx(std::cos(uf) / std::sqrt(40.0)));
}

TEST_CASE("cycloid path obeys the dynamics and energy conservation") {
  const Benchmark b = brachistochrone();
  const Cycloid c = cycloid_through(2.0, 2.0, 10.0);
  for (double t : {0.05, 0.4, 0.8}) {
    const double h = 1e-6;
    const Vec xdot = (c.state(t + h) - c.state(t - h)) / (2 * h);
    const Vec x = c.state(t);
    CHECK((xdot - b.problem.f(x, Vec{{c.control(t)}}, t)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(x(2) * x(2) == doctest::Approx(-20.0 * x(1)).epsilon(1e-12));
  }
}

TEST_CASE("brachistochrone benchmark setup") {
  const Benchmark b = brachistochrone();
  CHECK(b.N == 101);
  CHECK(b.problem.tf_mode.free);
  CHECK(b.problem.tf_mode.value == 1.0);
  CHECK(b.gains.k_tf == 0.05);
  CHECK(*b.reference.tf == doctest::Approx(0.8164699).epsilon(1e-6));
  CHECK(b.problem.g(Vec{{2.0, -2.0, 5.0}}, 0.8).isZero(0.0));
}

TEST_CASE("registry") {
  const auto names = benchmark_names();
  CHECK(std::find(names.begin(), names.end(), "double-integrator") != names.end());
  CHECK(std::find(names.begin(), names.end(), "brachistochrone") != names.end());
  CHECK_FALSE(find_benchmark("no-such-problem").has_value());
  register_benchmark("double-integrator-N21", [] {
    Benchmark b = double_integrator();
    b.N = 21;
    return b;
  });
  REQUIRE(find_benchmark("double-integrator-N21").has_value());
  CHECK(find_benchmark("double-integrator-N21")->N == 21);
}
