#include <cmath>
#include <vector>

#include "doctest.h"
#include "vem/error.hpp"
#include "vem/numerics/linear_solve.hpp"
#include "vem/numerics/quadrature.hpp"
#include "vem/numerics/rk45.hpp"
#include "vem/numerics/spline.hpp"

using namespace vem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
std::vector<double> uniform(int n, double a, double b) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return g;
}
}  // namespace

TEST_CASE("rk45: exponential growth") {
  IntegratorOptions o;
  const auto path = rk45_integrate([](double, const VectorXd& y) { return y; },
                                   VectorXd::Ones(1), 0.0, 1.0, o);
  CHECK(std::abs(path.eval(1.0)(0) - std::exp(1.0)) <= 10 * o.rtol * std::exp(1.0));
}

TEST_CASE("rk45: constant field is reproduced exactly") {
  const auto path = rk45_integrate([](double, const VectorXd& y) { return VectorXd::Zero(y.size()); },
                                   VectorXd::Constant(2, 4.25), 0.0, 3.0);
  for (double t : {0.0, 0.3, 1.7, 3.0}) CHECK(path.eval(t)(1) == 4.25);
}

TEST_CASE("rk45: Riccati-type field matches 1/(1+t^2)") {
  IntegratorOptions o;
  o.rtol = 1e-8;
  o.atol = 1e-10;
  const auto path = rk45_integrate(
      [](double t, const VectorXd& y) { return VectorXd::Constant(1, -2.0 * t * y(0) * y(0)); },
      VectorXd::Ones(1), 0.0, 2.0, o);
  CHECK(path.y_stop()(0) == doctest::Approx(0.2).epsilon(1e-7));
  CHECK(path.eval(1.0)(0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("rk45: backward integration and the step cap") {
  const auto path = rk45_integrate([](double, const VectorXd& y) { return y; },
                                   VectorXd::Ones(1), 1.0, 0.0);
  CHECK(path.eval(0.0)(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
  CHECK(path.steps() >= 10);
  for (const auto& s : path.segments()) CHECK(std::abs(s.h) <= 0.1 + 1e-15);
}

TEST_CASE("rk45: invalid options are rejected") {
  IntegratorOptions o;
  o.rtol = -1.0;
  CHECK_THROWS_AS(o.validate(), Error);
  o = {};
  o.max_step = 0.0;
  CHECK_THROWS_AS(o.validate(), Error);
}

TEST_CASE("rk45_fixed: fifth-order convergence") {
  const VectorField f = [](double t, const VectorXd& y) { return VectorXd(std::cos(t) * y); };
  const double exact = std::exp(std::sin(2.0));
  const double e1 = std::abs(rk45_fixed(f, VectorXd::Ones(1), 0, 2, 10)(0) - exact);
  const double e2 = std::abs(rk45_fixed(f, VectorXd::Ones(1), 0, 2, 20)(0) - exact);
  CHECK(std::log2(e1 / e2) >= 4.0);
}

TEST_CASE("spline: cubic reproduction") {
  const auto nodes = uniform(5, 0.0, 2.0);
  MatrixXd v(5, 1);
  for (int i = 0; i < 5; ++i) v(i, 0) = std::pow(nodes[static_cast<std::size_t>(i)], 3);
  const SplineCoeffs s = spline_build(nodes, v);
  CHECK(std::abs(spline_eval(s, 0.3)(0) - 0.027) <= 1e-12);
  CHECK(std::abs(s.derivative(1.1)(0) - 3 * 1.21) <= 1e-12);
}

TEST_CASE("spline: constant data") {
  const auto nodes = uniform(7, -1.0, 1.0);
  const SplineCoeffs s = spline_build(nodes, MatrixXd::Constant(7, 2, -0.75));
  for (double t : {-1.0, -0.37, 0.0, 0.91}) {
    CHECK(s.eval(t, 0) == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(std::abs(s.derivative(t)(1)) <= 1e-14);
  }
}

TEST_CASE("spline: sin on 41 nodes has fourth-order midpoint error") {
  const auto nodes = uniform(41, 0.0, 2.0);
  MatrixXd v(41, 1);
  for (int i = 0; i < 41; ++i) v(i, 0) = std::sin(nodes[static_cast<std::size_t>(i)]);
  const SplineCoeffs s = spline_build(nodes, v);
  const double h = 0.05;
  double worst = 0.0;
  for (int i = 0; i + 1 < 41; ++i) {
    const double t = nodes[static_cast<std::size_t>(i)] + 0.5 * h;
    worst = std::max(worst, std::abs(s.eval(t, 0) - std::sin(t)));
  }
  CHECK(worst <= std::pow(h, 4));
}

TEST_CASE("spline: degenerate grids") {
  const std::vector<double> one{0.0};
  CHECK_THROWS_AS(spline_build(one, MatrixXd::Zero(1, 1)), Error);
  const std::vector<double> unsorted{0.0, 1.0, 0.5};
  CHECK_THROWS_AS(spline_build(unsorted, MatrixXd::Zero(3, 1)), Error);
}

TEST_CASE("quadrature: trapezoid facts") {
  for (int n : {2, 5, 41}) {
    const auto g = uniform(n, 0.0, 2.0);
    CHECK(grid_quadrature(std::span<const double>(g), std::span<const double>(g)) ==
          doctest::Approx(2.0).epsilon(1e-15));
    const std::vector<double> zero(g.size(), 0.0);
    CHECK(grid_quadrature(std::span<const double>(g), std::span<const double>(zero)) == 0.0);
  }
  const auto g = uniform(41, 0.0, 2.0);
  std::vector<double> sq;
  for (double t : g) sq.push_back(t * t);
  const double h = 0.05;
  const double bound = 2.0 * h * h * 2.0 / 12.0 * (1.0 + 1e-12);
  CHECK(std::abs(grid_quadrature(std::span<const double>(g), std::span<const double>(sq)) -
                 8.0 / 3.0) <= bound);
}

TEST_CASE("quadrature: Simpson is exact for cubics on even and odd interval counts") {
  for (int n : {5, 6, 41, 42}) {
    const auto g = uniform(n, 0.0, 2.0);
    std::vector<double> c;
    for (double t : g) c.push_back(t * t * t - t);
    CHECK(simpson_quadrature(g, c) == doctest::Approx(2.0).epsilon(1e-13));
  }
}

TEST_CASE("quadrature: cumulative from the right") {
  const auto g = uniform(11, 0.0, 1.0);
  const std::vector<double> ones(g.size(), 1.0);
  const auto tails = cumulative_from_right(std::span<const double>(g), ones);
  CHECK(tails.back() == 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(tails[i] == doctest::Approx(1.0 - g[i]));
  CHECK_THROWS_AS(cumulative_from_right(std::span<const double>(g), std::vector<double>(3, 1.0)),
                  Error);
}

TEST_CASE("solve_dense: identity, the double-integrator solve, and rank deficiency") {
  CHECK((solve_dense(MatrixXd::Identity(2, 2), VectorXd{{1.0, -2.0}}).x -
         VectorXd{{1.0, -2.0}}).norm() <= 1e-15);
  MatrixXd M(2, 2);
  M << 8.0 / 3.0, 2.0, 2.0, 2.0;
  M *= 0.1;
  const DenseSolution s = solve_dense(M, VectorXd{{0.3, 0.1}});
  CHECK(s.x(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.x(1) == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK(s.condition > 1.0);
  try {
    solve_dense(MatrixXd::Ones(2, 2), VectorXd::Ones(2));
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_system);
  }
}
