// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "vem/checks.hpp"
#include "vem/evolve_driver.hpp"
#include "vem/problems.hpp"

using namespace vem;

namespace {

struct Line {
  int criterion;
  bool passed;
  std::string text;
};
std::vector<Line> lines;

void report(int criterion, bool passed, const std::string& text) {
  lines.push_back({criterion, passed, text});
  std::printf("[%s] criterion %d: %s\n", passed ? "PASS" : "FAIL", criterion, text.c_str());
  std::fflush(stdout);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

struct Run {
  EvolutionHistory history;
  SolveReport report;
  int dimension = 0;
};

Run solve(const Benchmark& b, Method method) {
  SystemConfig cfg;
  cfg.method = method;
  cfg.N = b.N;
  cfg.gains = b.gains;
  const EvolutionSystem sys = assemble_ivp(b.problem, cfg);
  EvolveOptions opts;
  opts.tau_end = 300.0;
  opts.early_stop = false;
  Run r;
  r.history = evolve(sys, opts);
  r.report = summarize(sys, r.history, b.reference);
  r.dimension = sys.dimension();
  return r;
}

double sup(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

const Snapshot* snapshot_at(const EvolutionHistory& h, double tau) {
  for (const Snapshot& s : h.snapshots) {
    if (std::abs(s.tau - tau) <= 1e-9) return &s;
  }
  return nullptr;
}

}  // namespace

int main() {
  const Benchmark di = double_integrator();
  const Benchmark br = brachistochrone();
  const Run di3 = solve(di, Method::third);
  const Run di2 = solve(di, Method::second);
  const Run br3 = solve(br, Method::third);
  const Run br2 = solve(br, Method::second);

  // 1. Double integrator, third equation.
  {
    const SolveReport& r = di3.report;
    const Vec xf = di3.history.final_snapshot().states.bottomRows(1).transpose();
    const bool ok = di3.history.termination == "tau_end" && std::abs(r.J - 3.25) <= 1e-4 &&
                    r.e_u(0) <= 1e-3 && sup(xf) <= 1e-4;
    report(1, ok,
           "|J - 3.25| = " + sci(std::abs(r.J - 3.25)) + " (<= 1e-4), e_u = " + sci(r.e_u(0)) +
               " (<= 1e-3), |x(2)| = " + sci(sup(xf)) + " (<= 1e-4)");
  }

  // 2. Multiplier trace.
  {
    const Snapshot* s0 = snapshot_at(di3.history, 0.0);
    const Snapshot* s300 = snapshot_at(di3.history, 300.0);
    bool ok = s0 && s300;
    std::string text = "missing snapshots";
    if (ok) {
      const Vec start_reference{{2.9963, -2.4963}};
      const Vec continuum{{3.0, -2.5}};
      const double d_start = sup(s0->pi - start_reference);
      const double d_cont = sup(s0->pi - continuum);
      const double d_end = sup(s300->pi - continuum);
      ok = d_start <= 5e-3 && d_cont <= 1e-2 && d_end <= 1e-3;
      text = "pi(0) - [2.9963, -2.4963] = " + sci(d_start) + " (<= 5e-3), pi(0) - [3, -2.5] = " +
             sci(d_cont) + " (<= 1e-2), pi(300) - [3, -2.5] = " + sci(d_end) + " (<= 1e-3)";
    }
    report(2, ok, text);
  }

  // 3. Costates.
  {
    const double e = di3.report.e_lambda.value_or(INFINITY);
    report(3, e <= 1e-2, "sup |lambda - [3, 3.5 - 3t]| = " + sci(e) + " (<= 1e-2)");
  }

  // 4. Brachistochrone, third equation.
  {
    const SolveReport& r = br3.report;
    const double e_pi = sup(r.pi - Vec{{-0.1477, 0.0564}});
    const double e_x = sup(r.e_x);
    const bool ok = br3.history.termination == "tau_end" && std::abs(r.tf - 0.8165) <= 5e-4 &&
                    e_pi <= 5e-3 && e_x <= 1e-3;
    report(4, ok,
           "tf = " + std::to_string(r.tf) + " (0.8165 +- 5e-4), pi - [-0.1477, 0.0564] = " +
               sci(e_pi) + " (<= 5e-3), state error = " + sci(e_x) + " (<= 1e-3)");
  }

  // 5. Table ordering and IVP dimensions.
  {
    const auto dominates = [](const SolveReport& third, const SolveReport& second,
                              std::string& detail) {
      bool ok = third.e_J < second.e_J;
      std::ostringstream os;
      os << "e_J " << sci(third.e_J) << (third.e_J < second.e_J ? " < " : " >= ")
         << sci(second.e_J);
      for (Eigen::Index i = 0; i < third.e_u.size(); ++i) {
        ok = ok && third.e_u(i) < second.e_u(i);
        os << ", e_u " << sci(third.e_u(i)) << (third.e_u(i) < second.e_u(i) ? " < " : " >= ")
           << sci(second.e_u(i));
      }
      for (Eigen::Index i = 0; i < third.e_x.size(); ++i) {
        ok = ok && third.e_x(i) < second.e_x(i);
        os << ", e_x" << i + 1 << " " << sci(third.e_x(i))
           << (third.e_x(i) < second.e_x(i) ? " < " : " >= ") << sci(second.e_x(i));
      }
      detail = os.str();
      return ok;
    };
    std::string d1, d2;
    const bool ok1 = dominates(di3.report, di2.report, d1);
    const bool ok2 = dominates(br3.report, br2.report, d2);
    const bool dims = di3.dimension == 41 && di2.dimension == 123 && br3.dimension == 102 &&
                      br2.dimension == 405;
    report(5, dims,
           "IVP dimensions " + std::to_string(di3.dimension) + "/" +
               std::to_string(di2.dimension) + " and " + std::to_string(br3.dimension) + "/" +
               std::to_string(br2.dimension) + " (41/123 and 102/405)");
    report(5, ok1, "double integrator, third vs second: " + d1);
    report(5, ok2, "brachistochrone, third vs second: " + d2);
  }

  // 6. Property suite.
  {
    for (const checks::CheckResult& c : checks::invariant_suite(20260101)) {
      const bool is_order = c.name.find("order") != std::string::npos;
      report(6, c.passed,
             c.name + " = " + sci(c.value) + (is_order ? " (>= " : " (<= ") + sci(c.tolerance) +
                 ")");
    }
  }

  // 7. Monotone approach of J.
  {
    const auto& trace = di3.history.trace;
    bool rising = true, shrinking = true;
    double worst_drop = 0.0, worst_growth = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
      if (trace[i].tau <= 100.0 + 1e-9) {
        const double drop = trace[i - 1].J - trace[i].J;
        worst_drop = std::max(worst_drop, drop);
        rising = rising && drop <= 0.0;
      }
      if (trace[i - 1].tau >= 100.0 - 1e-9) {
        const double growth = std::abs(trace[i].J - 3.25) - std::abs(trace[i - 1].J - 3.25);
        worst_growth = std::max(worst_growth, growth);
        shrinking = shrinking && growth <= 0.0;
      }
    }
    const Snapshot* s100 = snapshot_at(di3.history, 100.0);
    report(7, rising && shrinking && s100,
           "largest J decrease on tau <= 100 = " + sci(worst_drop) +
               ", largest |J - 3.25| increase on tau >= 100 = " + sci(worst_growth) +
               (s100 ? ", |J(100) - 3.25| = " + sci(std::abs(s100->J - 3.25)) : std::string()));
  }

  int failed = 0;
  for (const Line& l : lines) failed += l.passed ? 0 : 1;
  std::printf("%zu/%zu acceptance lines passed\n", lines.size() - static_cast<std::size_t>(failed),
              lines.size());
  return failed == 0 ? 0 : 1;
}
