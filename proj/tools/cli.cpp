#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vem/checks.hpp"
#include "vem/problems.hpp"

namespace vem::cli {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json to_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json to_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) raise(ErrorCode::io_failure, "cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) raise(ErrorCode::io_failure, "cannot create " + dir.string());
}

struct PreparedRun {
  Benchmark bench;
  SystemConfig system;
  EvolveOptions evolve;
};

Mat scaled_identity(int size, double k) { return k * Mat::Identity(size, size); }

PreparedRun prepare(const RunConfig& cfg) {
  std::optional<Benchmark> bench = find_benchmark(cfg.problem);
  if (!bench) raise(ErrorCode::invalid_argument, "unknown problem '" + cfg.problem + "'");
  const OcpProblem& p = bench->problem;

  PreparedRun run{*bench, {}, {}};
  GainSet& g = run.bench.gains;
  if (cfg.K) g.K = scaled_identity(p.m, *cfg.K);
  if (cfg.K_g) g.K_g = scaled_identity(p.q, *cfg.K_g);
  if (cfg.k_tf) g.k_tf = *cfg.k_tf;
  if (cfg.K_x0) g.K_x0 = scaled_identity(p.n, *cfg.K_x0);
  if (cfg.K_f) g.K_f = scaled_identity(p.n, *cfg.K_f);

  run.system.method = cfg.method;
  run.system.mode = cfg.mode;
  run.system.N = cfg.N.value_or(bench->N);
  run.system.gains = g;
  run.system.inner.rtol = cfg.inner_rtol.value_or(cfg.rtol);
  run.system.inner.atol = cfg.inner_atol.value_or(cfg.atol);

  run.evolve.tau_end = cfg.tau_end.value_or(bench->tau_end);
  run.evolve.snapshot_taus = cfg.snapshots;
  run.evolve.opts.rtol = cfg.rtol;
  run.evolve.opts.atol = cfg.atol;
  run.evolve.early_stop = cfg.early_stop;
  if (run.system.N < 2) raise(ErrorCode::invalid_argument, "N must be at least 2");
  if (!(run.evolve.tau_end >= 0.0)) raise(ErrorCode::invalid_argument, "tau-end must be non-negative");
  return run;
}

std::string trajectory_csv(const EvolutionHistory& h, int n, int m) {
  std::ostringstream os;
  os << "tau,t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= m; ++i) os << ",u" << i;
  for (int i = 1; i <= n; ++i) os << ",lambda" << i;
  os << "\n";
  for (const Snapshot& s : h.snapshots) {
    const bool have_lambda = s.costates.rows() == s.times.size();
    for (Eigen::Index r = 0; r < s.times.size(); ++r) {
      os << g17(s.tau) << ',' << g17(s.times(r));
      for (int i = 0; i < n; ++i) os << ',' << g17(s.states(r, i));
      for (int i = 0; i < m; ++i) os << ',' << g17(s.controls(r, i));
      for (int i = 0; i < n; ++i) {
        os << ',';
        if (have_lambda) os << g17(s.costates(r, i));
      }
      os << "\n";
    }
  }
  return os.str();
}

ordered_json history_json(const EvolutionHistory& h) {
  ordered_json j;
  ordered_json tau = ordered_json::array(), J = ordered_json::array(), tf = ordered_json::array(),
               pi = ordered_json::array(), opt = ordered_json::array(),
               con = ordered_json::array(), tra = ordered_json::array();
  for (const TracePoint& t : h.trace) {
    tau.push_back(t.tau);
    J.push_back(t.J);
    tf.push_back(t.tf);
    pi.push_back(to_json(t.pi));
    opt.push_back(t.residuals.optimality_inf);
    con.push_back(t.residuals.constraint_inf);
    tra.push_back(t.residuals.transversality);
  }
  j["tau"] = tau;
  j["J"] = J;
  j["tf"] = tf;
  j["pi"] = pi;
  j["residual_optimality"] = opt;
  j["residual_constraint"] = con;
  j["residual_transversality"] = tra;
  return j;
}

ordered_json report_json(const SolveReport& r, const EvolutionHistory& h) {
  ordered_json j;
  j["problem"] = r.problem;
  j["method"] = to_string(r.method);
  j["mode"] = to_string(r.mode);
  j["N"] = r.N;
  j["dimension"] = r.dimension;
  j["tau_final"] = r.tau_final;
  j["termination"] = r.termination;
  j["J"] = r.J;
  j["tf"] = r.tf;
  j["pi"] = to_json(r.pi);
  j["residuals"] = {{"optimality", r.residuals.optimality_inf},
                    {"constraint", r.residuals.constraint_inf},
                    {"transversality", r.residuals.transversality}};
  j["e_J"] = r.e_J;
  j["e_u"] = to_json(r.e_u);
  j["e_x"] = to_json(r.e_x);
  j["e_tf"] = to_json(r.e_tf);
  j["e_pi"] = to_json(r.e_pi);
  j["e_lambda"] = to_json(r.e_lambda);
  j["stats"] = {{"accepted", r.stats.accepted},
                {"rejected", r.stats.rejected},
                {"evaluations", r.stats.evaluations}};
  if (h.failure) {
    j["failure"] = {{"code", std::string(to_string(h.failure->code))},
                    {"message", h.failure->message},
                    {"tau", h.failure->tau}};
  } else {
    j["failure"] = nullptr;
  }
  return j;
}

struct RunResult {
  SolveReport report;
  EvolutionHistory history;
};

RunResult execute(const RunConfig& cfg) {
  PreparedRun run = prepare(cfg);
  const EvolutionSystem system = assemble_ivp(run.bench.problem, run.system);
  RunResult r{{}, evolve(system, run.evolve)};
  r.report = summarize(system, r.history, run.bench.reference);
  return r;
}

void add_run_options(CLI::App& app, RunConfig& cfg, std::string& mode) {
  app.add_option("--mode", mode, "feasible | quasi-feasible | modified (second equation)")
      ->capture_default_str();
  app.add_option("--N", cfg.N, "number of grid nodes")->check(CLI::PositiveNumber);
  app.add_option("--tau-end", cfg.tau_end, "final variation time")->check(CLI::NonNegativeNumber);
  app.add_option("--snapshots", cfg.snapshots, "snapshot taus")->delimiter(',');
  app.add_option("--K", cfg.K, "control gain (times identity)")->check(CLI::PositiveNumber);
  app.add_option("--Kg", cfg.K_g, "constraint gain (times identity)")->check(CLI::PositiveNumber);
  app.add_option("--ktf", cfg.k_tf, "terminal-time gain")->check(CLI::PositiveNumber);
  app.add_option("--Kx0", cfg.K_x0, "initial-state correction gain")->check(CLI::PositiveNumber);
  app.add_option("--Kf", cfg.K_f, "dynamics-defect correction gain")->check(CLI::PositiveNumber);
  app.add_option("--rtol", cfg.rtol, "tau-integration relative tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--atol", cfg.atol, "tau-integration absolute tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--inner-rtol", cfg.inner_rtol, "t-integration relative tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--inner-atol", cfg.inner_atol, "t-integration absolute tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out_dir, "output directory");
}

void resolve_names(RunConfig& cfg, const std::string& method, const std::string& mode) {
  const auto m = parse_method(method);
  if (!m) throw CLI::ValidationError("--method", "unknown method '" + method + "'");
  const auto md = parse_mode(mode);
  if (!md) throw CLI::ValidationError("--mode", "unknown mode '" + mode + "'");
  cfg.method = *m;
  cfg.mode = *md;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  RunResult r = execute(cfg);
  ensure_dir(cfg.out_dir);
  const int n = static_cast<int>(r.report.e_x.size());
  const int m = static_cast<int>(r.report.e_u.size());
  write_text(cfg.out_dir / "trajectory.csv", trajectory_csv(r.history, n, m));
  write_text(cfg.out_dir / "history.json", history_json(r.history).dump(2) + "\n");
  write_text(cfg.out_dir / "report.json", report_json(r.report, r.history).dump(2) + "\n");
  write_text(cfg.out_dir / "timing.json",
             ordered_json{{"wall_seconds", r.report.wall_seconds}}.dump(2) + "\n");

  out << r.report.problem << " / " << to_string(r.report.method) << ": termination "
      << r.report.termination << " at tau = " << g17(r.report.tau_final) << ", J = "
      << g17(r.report.J) << ", tf = " << g17(r.report.tf) << ", e_J = " << r.report.e_J << "\n";
  out << "wrote " << (cfg.out_dir / "report.json").string() << "\n";
  if (r.history.failure) {
    throw Error(r.history.failure->code, r.history.failure->message);
  }
  return kOk;
}

struct CompareRow {
  std::string problem;
  std::string method;
  int N = 0;
  int dimension = 0;
  double wall = 0.0;
  std::string status;
  double e_J = 0.0;
  Vec e_u;
  Vec e_x;
};

std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

int cmd_compare(RunConfig base, const std::vector<std::string>& problems,
                const std::vector<std::string>& methods, std::ostream& out, std::ostream& err) {
  if (problems.size() * methods.size() < 2) {
    err << "error: need ≥ 2 runs\n";
    return kUsage;
  }
  std::vector<CompareRow> rows;
  int width_x = 0;
  bool any_failed = false;
  for (const std::string& problem : problems) {
    for (const std::string& method : methods) {
      RunConfig cfg = base;
      cfg.problem = problem;
      const auto m = parse_method(method);
      if (!m) {
        err << "error: unknown method '" << method << "'\n";
        return kUsage;
      }
      cfg.method = *m;
      CompareRow row;
      row.problem = problem;
      row.method = method;
      try {
        RunResult r = execute(cfg);
        row.N = r.report.N;
        row.dimension = r.report.dimension;
        row.wall = r.report.wall_seconds;
        row.status = r.history.failure ? std::string(to_string(r.history.failure->code))
                                       : r.report.termination;
        row.e_J = r.report.e_J;
        row.e_u = r.report.e_u;
        row.e_x = r.report.e_x;
        any_failed = any_failed || r.history.failure.has_value();
      } catch (const Error& e) {
        row.status = std::string(to_string(e.code()));
        err << problem << " / " << method << ": " << e.what() << "\n";
        any_failed = true;
      }
      width_x = std::max(width_x, static_cast<int>(row.e_x.size()));
      rows.push_back(std::move(row));
    }
  }

  std::ostringstream csv;
  csv << "problem,method,N,dimension,wall_seconds,status,e_J,e_u";
  for (int i = 1; i <= width_x; ++i) csv << ",e_x" << i;
  csv << "\n";
  for (const CompareRow& r : rows) {
    csv << r.problem << ',' << r.method << ',' << r.N << ',' << r.dimension << ',' << g17(r.wall)
        << ',' << r.status << ',' << g17(r.e_J) << ','
        << (r.e_u.size() ? g17(r.e_u.maxCoeff()) : "");
    for (int i = 0; i < width_x; ++i) {
      csv << ',';
      if (i < r.e_x.size()) csv << g17(r.e_x(i));
    }
    csv << "\n";
  }
  ensure_dir(base.out_dir);
  write_text(base.out_dir / "compare.csv", csv.str());

  out << std::left << std::setw(20) << "problem" << std::setw(8) << "method" << std::setw(6)
      << "N" << std::setw(10) << "dimension" << std::setw(12) << "wall [s]" << std::setw(12)
      << "e_J" << std::setw(12) << "e_u";
  for (int i = 1; i <= width_x; ++i) out << std::setw(12) << ("e_x" + std::to_string(i));
  out << "status\n";
  for (const CompareRow& r : rows) {
    out << std::setw(20) << r.problem << std::setw(8) << r.method << std::setw(6) << r.N
        << std::setw(10) << r.dimension << std::setw(12) << fmt_sci(r.wall) << std::setw(12)
        << fmt_sci(r.e_J) << std::setw(12) << (r.e_u.size() ? fmt_sci(r.e_u.maxCoeff()) : "-");
    for (int i = 0; i < width_x; ++i) {
      out << std::setw(12) << (i < r.e_x.size() ? fmt_sci(r.e_x(i)) : "-");
    }
    out << r.status << "\n";
  }
  return any_failed ? kFailure : kOk;
}

int cmd_check(const std::string& suite, std::uint64_t seed, std::ostream& out) {
  std::vector<checks::CheckResult> results;
  if (suite == "derivatives" || suite == "all") {
    for (auto& r : checks::derivative_suite(seed)) results.push_back(std::move(r));
  }
  if (suite == "invariants" || suite == "all") {
    for (auto& r : checks::invariant_suite(seed)) results.push_back(std::move(r));
  }
  int failed = 0;
  for (const checks::CheckResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << fmt_sci(r.value)
        << (r.name.find("order") != std::string::npos ? " >= " : " <= ") << fmt_sci(r.tolerance);
    if (!r.detail.empty()) out << " (" << r.detail << ")";
    out << "\n";
    failed += r.passed ? 0 : 1;
  }
  out << results.size() - static_cast<std::size_t>(failed) << "/" << results.size()
      << " checks passed\n";
  return failed == 0 ? kOk : kFailure;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::step_failure:
      return kStepFailure;
    case ErrorCode::singular_system:
      return kSingularSystem;
    case ErrorCode::tf_collapse:
      return kTfCollapse;
    case ErrorCode::non_finite_callback:
    case ErrorCode::non_finite_field:
    case ErrorCode::non_finite_dynamics:
      return kNonFinite;
    case ErrorCode::dimension_mismatch:
      return kDimensionMismatch;
    case ErrorCode::io_failure:
      return kIo;
    case ErrorCode::invalid_argument:
    case ErrorCode::degenerate_grid:
      return kUsage;
  }
  return kFailure;
}

fs::path default_output_dir() {
  const char* env = std::getenv("VEM_OUTPUT_DIR");
  return (env && *env) ? fs::path(env) : fs::path("vem_out");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variation evolving solver for optimal control problems"};
  app.require_subcommand(1);

  RunConfig solve_cfg;
  std::string solve_method = "third", solve_mode = "quasi-feasible";
  bool no_early_stop = false;
  CLI::App* solve = app.add_subcommand("solve", "evolve one benchmark and write its results");
  solve->add_option("--problem", solve_cfg.problem, "benchmark name")->capture_default_str();
  solve->add_option("--method", solve_method, "second | third")->capture_default_str();
  add_run_options(*solve, solve_cfg, solve_mode);
  solve->add_flag("--no-early-stop", no_early_stop, "integrate to tau-end regardless of residuals");

  RunConfig cmp_cfg;
  std::string cmp_mode = "quasi-feasible";
  std::vector<std::string> cmp_problems{"double-integrator"};
  std::vector<std::string> cmp_methods{"second", "third"};
  bool early_stop = false;
  CLI::App* compare = app.add_subcommand("compare", "tabulate errors of several runs");
  compare->add_option("--problems", cmp_problems, "benchmark names")->delimiter(',');
  compare->add_option("--methods", cmp_methods, "methods")->delimiter(',');
  add_run_options(*compare, cmp_cfg, cmp_mode);
  compare->add_flag("--early-stop", early_stop, "stop runs once the residuals are small");

  std::string suite;
  std::uint64_t seed = 1;
  CLI::App* check = app.add_subcommand("check", "run the derivative and invariant suites");
  check->add_option("suite", suite, "derivatives | invariants | all")
      ->required()
      ->check(CLI::IsMember({"derivatives", "invariants", "all"}));
  check->add_option("--seed", seed, "seed for the random fixtures")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (*solve) {
      resolve_names(solve_cfg, solve_method, solve_mode);
      solve_cfg.early_stop = !no_early_stop;
      if (solve_cfg.out_dir.empty()) solve_cfg.out_dir = default_output_dir();
    }
    if (*compare) {
      resolve_names(cmp_cfg, "third", cmp_mode);
      cmp_cfg.early_stop = early_stop;
      if (cmp_cfg.out_dir.empty()) cmp_cfg.out_dir = default_output_dir();
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return cmd_solve(solve_cfg, out);
    if (*compare) return cmd_compare(cmp_cfg, cmp_problems, cmp_methods, out, err);
    return cmd_check(suite, seed, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace vem::cli
