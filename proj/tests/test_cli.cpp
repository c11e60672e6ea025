#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = vem::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vem_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("cli solve: double integrator third equation") {
  const fs::path dir = scratch("solve_di");
  const Captured c = run({"solve", "--problem", "double-integrator", "--method", "third",
                          "--no-early-stop", "--out", dir.string()});
  REQUIRE(c.code == 0);
  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["e_J"].get<double>() <= 1e-4);
  CHECK(rep["dimension"] == 41);
  CHECK(rep["termination"] == "tau_end");
  CHECK(fs::exists(dir / "timing.json"));

  const auto rows = lines(slurp(dir / "trajectory.csv"));
  CHECK(rows.front() == "tau,t,x1,x2,u1,lambda1,lambda2");
  CHECK(rows.size() == 1 + 41 * 7);

  const json hist = json::parse(slurp(dir / "history.json"));
  for (const char* key : {"tau", "J", "tf", "pi", "residual_optimality", "residual_constraint",
                          "residual_transversality"}) {
    CHECK(hist[key].size() == hist["tau"].size());
  }
  CHECK(hist["pi"][0].size() == 2);
}

TEST_CASE("cli solve: zero horizon writes only the initial guess") {
  const fs::path dir = scratch("solve_zero");
  REQUIRE(run({"solve", "--problem", "double-integrator", "--tau-end", "0", "--out", dir.string()})
              .code == 0);
  const auto rows = lines(slurp(dir / "trajectory.csv"));
  REQUIRE(rows.size() == 42);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].rfind("0,", 0) == 0);
    std::vector<std::string> cells;
    std::istringstream is(rows[i]);
    for (std::string cell; std::getline(is, cell, ',');) cells.push_back(cell);
    CHECK(cells[4] == "0");
  }
}

TEST_CASE("cli solve: brachistochrone tf trace") {
  const fs::path dir = scratch("solve_br");
  REQUIRE(run({"solve", "--problem", "brachistochrone", "--method", "third", "--tau-end", "300",
               "--no-early-stop", "--out", dir.string()})
              .code == 0);
  const json hist = json::parse(slurp(dir / "history.json"));
  const auto& tf = hist["tf"];
  CHECK(tf[0].get<double>() == 1.0);
  CHECK(tf[1].get<double>() < 1.0);
  CHECK(std::abs(tf.back().get<double>() - 0.8165) <= 5e-4);
}

TEST_CASE("cli solve: identical configurations give byte-identical reports") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::vector<std::string> base{"solve", "--problem", "brachistochrone", "--method",
                                      "second", "--tau-end", "30", "--out"};
  auto args_a = base, args_b = base;
  args_a.push_back(a.string());
  args_b.push_back(b.string());
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
}

TEST_CASE("cli solve: output directory from the environment") {
  const fs::path dir = scratch("env_dir");
  ::setenv("VEM_OUTPUT_DIR", dir.string().c_str(), 1);
  CHECK(vem::cli::default_output_dir() == dir);
  REQUIRE(run({"solve", "--tau-end", "0"}).code == 0);
  ::unsetenv("VEM_OUTPUT_DIR");
  CHECK(fs::exists(dir / "report.json"));
  CHECK(vem::cli::default_output_dir() == fs::path("vem_out"));
}

TEST_CASE("cli solve: usage and solver errors map to exit codes") {
  CHECK(run({"solve", "--problem", "nope", "--out", scratch("bad").string()}).code == 2);
  CHECK(run({"solve", "--method", "fourth"}).code == 2);
  CHECK(run({"solve", "--N", "-3"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"solve", "--method", "third", "--mode", "modified", "--out",
             scratch("bad_mode").string()})
            .code == 2);
  CHECK(vem::cli::exit_code_for(vem::ErrorCode::singular_system) == 4);
  CHECK(vem::cli::exit_code_for(vem::ErrorCode::tf_collapse) == 5);
  CHECK(vem::cli::exit_code_for(vem::ErrorCode::step_failure) == 3);
  CHECK(vem::cli::exit_code_for(vem::ErrorCode::non_finite_dynamics) == 6);
  CHECK(vem::cli::exit_code_for(vem::ErrorCode::io_failure) == 8);
}

TEST_CASE("cli solve: unwritable output directory") {
  const fs::path file = scratch("blocker");
  std::ofstream(file) << "x";
  const Captured c = run({"solve", "--tau-end", "0", "--out", (file / "sub").string()});
  CHECK(c.code == 8);
  CHECK(c.err.find("IoFailure") != std::string::npos);
}

TEST_CASE("cli compare: double integrator rows") {
  const fs::path dir = scratch("compare_di");
  const Captured c = run({"compare", "--problems", "double-integrator", "--methods",
                          "second,third", "--out", dir.string()});
  REQUIRE(c.code == 0);
  const auto rows = lines(slurp(dir / "compare.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "problem,method,N,dimension,wall_seconds,status,e_J,e_u,e_x1,e_x2");
  CHECK(rows[1].rfind("double-integrator,second,41,123,", 0) == 0);
  CHECK(rows[2].rfind("double-integrator,third,41,41,", 0) == 0);
  CHECK(c.out.find("dimension") != std::string::npos);
}

TEST_CASE("cli compare: brachistochrone third row dominates") {
  const fs::path dir = scratch("compare_br");
  REQUIRE(run({"compare", "--problems", "brachistochrone", "--out", dir.string()}).code == 0);
  const auto rows = lines(slurp(dir / "compare.csv"));
  REQUIRE(rows.size() == 3);
  auto cells = [](const std::string& row) {
    std::vector<std::string> out;
    std::istringstream is(row);
    for (std::string c; std::getline(is, c, ',');) out.push_back(c);
    return out;
  };
  const auto second = cells(rows[1]), third = cells(rows[2]);
  CHECK(second[3] == "405");
  CHECK(third[3] == "102");
  for (std::size_t col = 6; col < second.size(); ++col) {
    CHECK(std::stod(third[col]) < std::stod(second[col]));
  }
}

TEST_CASE("cli compare: a single run is refused") {
  const Captured c = run({"compare", "--problems", "double-integrator", "--methods", "third"});
  CHECK(c.code == 2);
  CHECK(c.err.find("need ≥ 2 runs") != std::string::npos);
}

TEST_CASE("cli check suites") {
  const Captured d = run({"check", "derivatives"});
  CHECK(d.code == 0);
  CHECK(d.out.find("FAIL") == std::string::npos);
  const Captured i = run({"check", "invariants", "--seed", "11"});
  CHECK(i.code == 0);
  CHECK(i.out.find("p_u kernel form") != std::string::npos);
  CHECK(i.out.find("Psi") != std::string::npos);
  CHECK(run({"check", "all"}).code == 0);
  CHECK(run({"check", "bogus"}).code == 2);
  CHECK(run({"check"}).code == 2);
}
