#include "vem/problems.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/tools/toms748_solve.hpp>

#include "vem/error.hpp"

namespace vem {

Benchmark double_integrator() {
  OcpProblem p;
  p.name = "double-integrator";
  p.n = 2;
  p.m = 1;
  p.q = 2;
  p.t0 = 0.0;
  p.x0 = Vec::Ones(2);
  p.tf_mode = TerminalTime::fixed(2.0);

  p.dynamics = [](const Vec& x, const Vec& u, double) { return Vec{{x(1), u(0)}}; };
  p.jac_fx = [](const Vec&, const Vec&, double) { return Mat{{0.0, 1.0}, {0.0, 0.0}}; };
  p.jac_fu = [](const Vec&, const Vec&, double) { return Mat{{0.0}, {1.0}}; };
  p.running_cost = [](const Vec&, const Vec& u, double) { return 0.5 * u(0) * u(0); };
  p.grad_Lx = [](const Vec&, const Vec&, double) { return Vec(Vec::Zero(2)); };
  p.grad_Lu = [](const Vec&, const Vec& u, double) { return Vec{{u(0)}}; };
  p.terminal_constraint = [](const Vec& xf, double) { return xf; };
  p.jac_gx = [](const Vec&, double) { return Mat(Mat::Identity(2, 2)); };
  p.deriv_gt = [](const Vec&, double) { return Vec(Vec::Zero(2)); };

  Benchmark b;
  b.problem = std::move(p);
  b.gains = GainSet::uniform(2, 1, 2, 0.1, 0.1, 0.05);
  b.N = 41;
  b.tau_end = 300.0;
  b.reference.u = [](double t) { return Vec{{3.0 * t - 3.5}}; };
  b.reference.x = [](double t) {
    return Vec{{0.5 * t * t * t - 1.75 * t * t + t + 1.0, 1.5 * t * t - 3.5 * t + 1.0}};
  };
  b.reference.lambda = [](double t) { return Vec{{3.0, -3.0 * t + 3.5}}; };
  b.reference.J = 3.25;
  b.reference.pi = Vec{{3.0, -2.5}};
  return b;
}

double Cycloid::theta(double t) const { return std::sqrt(gravity / radius) * t; }

Vec Cycloid::state(double t) const {
  const double th = theta(t);
  return Vec{{radius * (th - std::sin(th)), -radius * (1.0 - std::cos(th)),
              2.0 * std::sqrt(gravity * radius) * std::sin(0.5 * th)}};
}

Vec Cycloid::multipliers() const {
  const double uf = 0.5 * theta_f;
  const double vf = state(tf)(2);
  return Vec{{-std::sin(uf) / vf, std::cos(uf) / vf}};
}

Cycloid cycloid_through(double x_target, double drop, double gravity) {
  if (!(x_target > 0.0) || !(drop > 0.0) || !(gravity > 0.0)) {
    raise(ErrorCode::invalid_argument, "cycloid needs positive target, drop and gravity");
  }
  const double ratio = x_target / drop;
  const auto residual = [ratio](double th) {
    return th - std::sin(th) - ratio * (1.0 - std::cos(th));
  };
  // The residual is negative just above zero and positive at 2 pi.
  const double lo = 1e-6;
  const double hi = 2.0 * std::numbers::pi;
  boost::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      residual, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  Cycloid c;
  c.gravity = gravity;
  c.theta_f = 0.5 * (bracket.first + bracket.second);
  c.radius = drop / (1.0 - std::cos(c.theta_f));
  c.tf = c.theta_f * std::sqrt(c.radius / gravity);
  return c;
}

Benchmark brachistochrone() {
  constexpr double g = 10.0;
  OcpProblem p;
  p.name = "brachistochrone";
  p.n = 3;
  p.m = 1;
  p.q = 2;
  p.t0 = 0.0;
  p.x0 = Vec::Zero(3);
  p.tf_mode = TerminalTime::free_with_guess(1.0);

  p.dynamics = [](const Vec& x, const Vec& u, double) {
    return Vec{{x(2) * std::sin(u(0)), -x(2) * std::cos(u(0)), g * std::cos(u(0))}};
  };
  p.jac_fx = [](const Vec&, const Vec& u, double) {
    return Mat{{0.0, 0.0, std::sin(u(0))}, {0.0, 0.0, -std::cos(u(0))}, {0.0, 0.0, 0.0}};
  };
  p.jac_fu = [](const Vec& x, const Vec& u, double) {
    return Mat{{x(2) * std::cos(u(0))}, {x(2) * std::sin(u(0))}, {-g * std::sin(u(0))}};
  };
  p.terminal_cost = [](const Vec&, double tf) { return tf; };
  p.grad_phix = [](const Vec&, double) { return Vec(Vec::Zero(3)); };
  p.deriv_phit = [](const Vec&, double) { return 1.0; };
  p.terminal_constraint = [](const Vec& xf, double) { return Vec{{xf(0) - 2.0, xf(1) + 2.0}}; };
  p.jac_gx = [](const Vec&, double) { return Mat{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}; };
  p.deriv_gt = [](const Vec&, double) { return Vec(Vec::Zero(2)); };

  const Cycloid c = cycloid_through(2.0, 2.0, g);
  if (std::abs(c.tf - 0.8165) > 5e-4) {
    raise(ErrorCode::invalid_argument, "cycloid oracle disagrees with the expected terminal time 0.8165");
  }

  Benchmark b;
  b.problem = std::move(p);
  b.gains = GainSet::uniform(3, 1, 2, 0.1, 0.1, 0.05);
  b.N = 101;
  b.tau_end = 300.0;
  b.reference.u = [c](double t) { return Vec{{c.control(t)}}; };
  b.reference.x = [c](double t) { return c.state(t); };
  b.reference.J = c.tf;
  b.reference.tf = c.tf;
  b.reference.pi = c.multipliers();
  return b;
}

namespace {

struct Registry {
  std::mutex lock;
  std::map<std::string, BenchmarkFactory> factories{
      {"double-integrator", double_integrator},
      {"brachistochrone", brachistochrone},
  };
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_benchmark(const std::string& name, BenchmarkFactory factory) {
  if (name.empty() || !factory) raise(ErrorCode::invalid_argument, "benchmark needs a name and factory");
  Registry& r = registry();
  const std::lock_guard<std::mutex> guard(r.lock);
  r.factories[name] = std::move(factory);
}

std::optional<Benchmark> find_benchmark(const std::string& name) {
  BenchmarkFactory factory;
  {
    Registry& r = registry();
    const std::lock_guard<std::mutex> guard(r.lock);
    const auto it = r.factories.find(name);
    if (it == r.factories.end()) return std::nullopt;
    factory = it->second;
  }
  return factory();
}

std::vector<std::string> benchmark_names() {
  Registry& r = registry();
  const std::lock_guard<std::mutex> guard(r.lock);
  std::vector<std::string> names;
  for (const auto& [name, factory] : r.factories) names.push_back(name);
  return names;
}

}  // namespace vem
