#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vem {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using StageVector = std::function<Vec(const Vec& x, const Vec& u, double t)>;
using StageMatrix = std::function<Mat(const Vec& x, const Vec& u, double t)>;
using StageScalar = std::function<double(const Vec& x, const Vec& u, double t)>;
using TerminalScalar = std::function<double(const Vec& xf, double tf)>;
using TerminalVector = std::function<Vec(const Vec& xf, double tf)>;
using TerminalMatrix = std::function<Mat(const Vec& xf, double tf)>;

struct TerminalTime {
  bool free = false;
  double value = 1.0;  // the fixed t_f, or the initial guess when free

  static TerminalTime fixed(double tf) { return {false, tf}; }
  static TerminalTime free_with_guess(double tf) { return {true, tf}; }
};

/// Bolza optimal control problem with terminal equality constraints:
///   minimize   phi(x(tf), tf) + integral_{t0}^{tf} L(x, u, t) dt
///   subject to x' = f(x, u, t),  x(t0) = x0,  g(x(tf), tf) = 0.
///
/// Every derivative callback is optional. Omitted first derivatives fall back
/// to central differences (O(h^2) accurate); omitted second derivatives of phi
/// are taken as zero. An omitted running or terminal cost is zero, and q == 0
/// means no terminal constraint. The record is treated as immutable once
/// handed to the solver; callbacks must be safe to call concurrently.
struct OcpProblem {
  std::string name;
  int n = 0;
  int m = 0;
  int q = 0;
  double t0 = 0.0;
  Vec x0;
  TerminalTime tf_mode;

  StageVector dynamics;
  StageMatrix jac_fx;
  StageMatrix jac_fu;

  StageScalar running_cost;
  StageVector grad_Lx;
  StageVector grad_Lu;

  TerminalScalar terminal_cost;
  TerminalVector grad_phix;
  TerminalScalar deriv_phit;
  TerminalMatrix hess_phixx;
  TerminalVector deriv_phixt;

  TerminalVector terminal_constraint;
  TerminalMatrix jac_gx;
  TerminalVector deriv_gt;

  // Evaluation entry points used by the solver; they apply the fallbacks above.
  Vec f(const Vec& x, const Vec& u, double t) const;
  Mat fx(const Vec& x, const Vec& u, double t) const;
  Mat fu(const Vec& x, const Vec& u, double t) const;
  double L(const Vec& x, const Vec& u, double t) const;
  Vec Lx(const Vec& x, const Vec& u, double t) const;
  Vec Lu(const Vec& x, const Vec& u, double t) const;
  double phi(const Vec& xf, double tf) const;
  Vec phi_x(const Vec& xf, double tf) const;
  double phi_t(const Vec& xf, double tf) const;
  Mat phi_xx(const Vec& xf, double tf) const;
  Vec phi_xt(const Vec& xf, double tf) const;
  Vec g(const Vec& xf, double tf) const;
  Mat gx(const Vec& xf, double tf) const;
  Vec gt(const Vec& xf, double tf) const;

  bool has_running_cost() const { return static_cast<bool>(running_cost); }
  bool has_terminal_cost() const { return static_cast<bool>(terminal_cost); }
};

/// Positive-definite evolution gains. K is m x m, K_g is q x q, K_x0 and K_f
/// are n x n and only used by the modified (infeasible-domain) second equation.
struct GainSet {
  Mat K;
  Mat K_g;
  double k_tf = 0.0;
  Mat K_x0;
  Mat K_f;

  static GainSet uniform(int n, int m, int q, double k, double k_g, double k_tf,
                         double k_x0 = 0.1, double k_f = 0.1);

  /// Throws InvalidArgument unless every matrix is square of the right size,
  /// symmetric and admits a Cholesky factorization, and k_tf > 0.
  void validate(int n, int m, int q, bool tf_free) const;
};

enum class FindingKind { dimension_mismatch, non_finite, rank_feasibility, missing_callback, bad_time };

struct Finding {
  FindingKind kind;
  std::string message;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
  bool has(FindingKind kind) const;
  bool operator==(const ValidationReport&) const = default;
};

/// Probes every callback at (x0, u = 0, t0) and at the terminal pairing
/// (x0, tf). Never throws; problems are reported as findings.
ValidationReport validate_problem(const OcpProblem& p);

struct DerivativeDiscrepancy {
  double max_abs = 0.0;
  bool supplied = false;  // false when the solver's own finite-difference fallback was compared
};

struct DiscrepancyReport {
  std::map<std::string, DerivativeDiscrepancy> entries;  // keyed "f_x", "f_u", "L_x", ...
  double worst() const;
};

/// Central-difference comparison of the analytic derivatives at (x, u, t);
/// terminal derivatives are probed at (x, t). Throws NonFiniteCallback when a
/// probe returns non-finite values.
DiscrepancyReport check_derivatives(const OcpProblem& p, const Vec& x, const Vec& u, double t,
                                    double h);

}  // namespace vem
