#include "vem/ocp_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vem/error.hpp"

namespace vem {
namespace {

double fd_step(double v) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(v));
}

// Central-difference Jacobian of a vector function of one vector argument.
template <typename F>
Mat central_jacobian(F&& fn, const Vec& at, int rows, double fixed_h = 0.0) {
  Mat J(rows, at.size());
  Vec probe = at;
  for (Eigen::Index j = 0; j < at.size(); ++j) {
    const double h = fixed_h > 0.0 ? fixed_h : fd_step(at[j]);
    probe[j] = at[j] + h;
    const Vec plus = fn(probe);
    probe[j] = at[j] - h;
    const Vec minus = fn(probe);
    probe[j] = at[j];
    J.col(j) = (plus - minus) / (2.0 * h);
  }
  return J;
}

template <typename F>
double central_scalar(F&& fn, double at, double fixed_h = 0.0) {
  const double h = fixed_h > 0.0 ? fixed_h : fd_step(at);
  return (fn(at + h) - fn(at - h)) / (2.0 * h);
}

Vec as_vec(double v) { return Vec::Constant(1, v); }

}  // namespace

Vec OcpProblem::f(const Vec& x, const Vec& u, double t) const { return dynamics(x, u, t); }

Mat OcpProblem::fx(const Vec& x, const Vec& u, double t) const {
  if (jac_fx) return jac_fx(x, u, t);
  return central_jacobian([&](const Vec& xp) { return dynamics(xp, u, t); }, x, n);
}

Mat OcpProblem::fu(const Vec& x, const Vec& u, double t) const {
  if (jac_fu) return jac_fu(x, u, t);
  return central_jacobian([&](const Vec& up) { return dynamics(x, up, t); }, u, n);
}

double OcpProblem::L(const Vec& x, const Vec& u, double t) const {
  return running_cost ? running_cost(x, u, t) : 0.0;
}

Vec OcpProblem::Lx(const Vec& x, const Vec& u, double t) const {
  if (!running_cost) return Vec::Zero(n);
  if (grad_Lx) return grad_Lx(x, u, t);
  return central_jacobian([&](const Vec& xp) { return as_vec(running_cost(xp, u, t)); }, x, 1)
      .transpose();
}

Vec OcpProblem::Lu(const Vec& x, const Vec& u, double t) const {
  if (!running_cost) return Vec::Zero(m);
  if (grad_Lu) return grad_Lu(x, u, t);
  return central_jacobian([&](const Vec& up) { return as_vec(running_cost(x, up, t)); }, u, 1)
      .transpose();
}

double OcpProblem::phi(const Vec& xf, double tf) const {
  return terminal_cost ? terminal_cost(xf, tf) : 0.0;
}

Vec OcpProblem::phi_x(const Vec& xf, double tf) const {
  if (!terminal_cost) return Vec::Zero(n);
  if (grad_phix) return grad_phix(xf, tf);
  return central_jacobian([&](const Vec& xp) { return as_vec(terminal_cost(xp, tf)); }, xf, 1)
      .transpose();
}

double OcpProblem::phi_t(const Vec& xf, double tf) const {
  if (!terminal_cost) return 0.0;
  if (deriv_phit) return deriv_phit(xf, tf);
  return central_scalar([&](double tp) { return terminal_cost(xf, tp); }, tf);
}

Mat OcpProblem::phi_xx(const Vec& xf, double tf) const {
  if (terminal_cost && hess_phixx) return hess_phixx(xf, tf);
  return Mat::Zero(n, n);
}

Vec OcpProblem::phi_xt(const Vec& xf, double tf) const {
  if (terminal_cost && deriv_phixt) return deriv_phixt(xf, tf);
  return Vec::Zero(n);
}

Vec OcpProblem::g(const Vec& xf, double tf) const {
  if (q == 0) return Vec::Zero(0);
  return terminal_constraint(xf, tf);
}

Mat OcpProblem::gx(const Vec& xf, double tf) const {
  if (q == 0) return Mat::Zero(0, n);
  if (jac_gx) return jac_gx(xf, tf);
  return central_jacobian([&](const Vec& xp) { return terminal_constraint(xp, tf); }, xf, q);
}

Vec OcpProblem::gt(const Vec& xf, double tf) const {
  if (q == 0) return Vec::Zero(0);
  if (deriv_gt) return deriv_gt(xf, tf);
  const double h = fd_step(tf);
  return (terminal_constraint(xf, tf + h) - terminal_constraint(xf, tf - h)) / (2.0 * h);
}

GainSet GainSet::uniform(int n, int m, int q, double k, double k_g, double k_tf, double k_x0,
                         double k_f) {
  GainSet gains;
  gains.K = k * Mat::Identity(m, m);
  gains.K_g = k_g * Mat::Identity(q, q);
  gains.k_tf = k_tf;
  gains.K_x0 = k_x0 * Mat::Identity(n, n);
  gains.K_f = k_f * Mat::Identity(n, n);
  return gains;
}

namespace {
void require_spd(const Mat& M, Eigen::Index size, const char* label) {
  if (M.rows() != size || M.cols() != size) {
    raise(ErrorCode::invalid_argument, std::string(label) + " must be " + std::to_string(size) +
                                           "x" + std::to_string(size));
  }
  if (size == 0) return;
  if (!M.allFinite() || (M - M.transpose()).cwiseAbs().maxCoeff() >
                            1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff())) {
    raise(ErrorCode::invalid_argument, std::string(label) + " must be symmetric");
  }
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) {
    raise(ErrorCode::invalid_argument, std::string(label) + " must be positive definite");
  }
}
}  // namespace

void GainSet::validate(int n, int m, int q, bool tf_free) const {
  require_spd(K, m, "K");
  require_spd(K_g, q, "K_g");
  require_spd(K_x0, n, "K_x0");
  require_spd(K_f, n, "K_f");
  if (tf_free && !(k_tf > 0.0)) raise(ErrorCode::invalid_argument, "k_tf must be positive");
}

bool ValidationReport::has(FindingKind kind) const {
  return std::any_of(findings.begin(), findings.end(),
                     [kind](const Finding& f) { return f.kind == kind; });
}

ValidationReport validate_problem(const OcpProblem& p) {
  ValidationReport report;
  auto add = [&report](FindingKind kind, std::string msg) {
    report.findings.push_back({kind, std::move(msg)});
  };

  if (p.n < 1 || p.m < 1 || p.q < 0) {
    add(FindingKind::dimension_mismatch, "dimensions must satisfy n >= 1, m >= 1, q >= 0");
    return report;
  }
  if (p.q > p.n) {
    add(FindingKind::rank_feasibility, "terminal constraint dimension q = " +
                                           std::to_string(p.q) + " exceeds state dimension n = " +
                                           std::to_string(p.n));
  }
  if (p.x0.size() != p.n) {
    add(FindingKind::dimension_mismatch, "x0 has length " + std::to_string(p.x0.size()));
    return report;
  }
  if (!p.tf_mode.free && !(p.tf_mode.value > p.t0)) {
    add(FindingKind::bad_time, "fixed terminal time must exceed t0");
  }
  if (p.tf_mode.free && !(p.tf_mode.value > p.t0)) {
    add(FindingKind::bad_time, "terminal time guess must exceed t0");
  }
  if (!p.dynamics) {
    add(FindingKind::missing_callback, "dynamics callback is required");
    return report;
  }
  if (p.q > 0 && !p.terminal_constraint) {
    add(FindingKind::missing_callback, "q > 0 but no terminal constraint callback");
    return report;
  }

  const Vec x = p.x0;
  const Vec u = Vec::Zero(p.m);
  const double t = p.t0;
  const double tf = p.tf_mode.value;

  auto check_vec = [&](const char* label, const Vec& v, Eigen::Index expected) {
    if (v.size() != expected) {
      add(FindingKind::dimension_mismatch, std::string(label) + " has length " +
                                               std::to_string(v.size()) + ", expected " +
                                               std::to_string(expected));
    } else if (!v.allFinite()) {
      add(FindingKind::non_finite, std::string(label) + " is not finite at the probe point");
    }
  };
  auto check_mat = [&](const char* label, const Mat& M, Eigen::Index rows, Eigen::Index cols) {
    if (M.rows() != rows || M.cols() != cols) {
      std::ostringstream msg;
      msg << label << " is " << M.rows() << "x" << M.cols() << ", expected " << rows << "x"
          << cols;
      add(FindingKind::dimension_mismatch, msg.str());
    } else if (!M.allFinite()) {
      add(FindingKind::non_finite, std::string(label) + " is not finite at the probe point");
    }
  };
  auto check_scalar = [&](const char* label, double v) {
    if (!std::isfinite(v)) add(FindingKind::non_finite, std::string(label) + " is not finite");
  };
  auto guarded = [&](const char* label, auto&& probe) {
    try {
      probe();
    } catch (const std::exception& e) {
      add(FindingKind::non_finite, std::string(label) + " threw: " + e.what());
    }
  };

  guarded("f", [&] { check_vec("f", p.f(x, u, t), p.n); });
  if (p.jac_fx) guarded("f_x", [&] { check_mat("f_x", p.jac_fx(x, u, t), p.n, p.n); });
  if (p.jac_fu) guarded("f_u", [&] { check_mat("f_u", p.jac_fu(x, u, t), p.n, p.m); });
  if (p.running_cost) {
    guarded("L", [&] { check_scalar("L", p.running_cost(x, u, t)); });
    if (p.grad_Lx) guarded("L_x", [&] { check_vec("L_x", p.grad_Lx(x, u, t), p.n); });
    if (p.grad_Lu) guarded("L_u", [&] { check_vec("L_u", p.grad_Lu(x, u, t), p.m); });
  }
  if (p.terminal_cost) {
    guarded("phi", [&] { check_scalar("phi", p.terminal_cost(x, tf)); });
    if (p.grad_phix) guarded("phi_x", [&] { check_vec("phi_x", p.grad_phix(x, tf), p.n); });
    if (p.deriv_phit) guarded("phi_t", [&] { check_scalar("phi_t", p.deriv_phit(x, tf)); });
    if (p.hess_phixx) {
      guarded("phi_xx", [&] { check_mat("phi_xx", p.hess_phixx(x, tf), p.n, p.n); });
    }
    if (p.deriv_phixt) {
      guarded("phi_xt", [&] { check_vec("phi_xt", p.deriv_phixt(x, tf), p.n); });
    }
  }
  if (p.q > 0) {
    guarded("g", [&] { check_vec("g", p.terminal_constraint(x, tf), p.q); });
    if (p.jac_gx) guarded("g_x", [&] { check_mat("g_x", p.jac_gx(x, tf), p.q, p.n); });
    if (p.deriv_gt) guarded("g_t", [&] { check_vec("g_t", p.deriv_gt(x, tf), p.q); });
  }
  return report;
}

double DiscrepancyReport::worst() const {
  double w = 0.0;
  for (const auto& [name, d] : entries) w = std::max(w, d.max_abs);
  return w;
}

DiscrepancyReport check_derivatives(const OcpProblem& p, const Vec& x, const Vec& u, double t,
                                    double h) {
  if (!(h > 0.0)) raise(ErrorCode::invalid_argument, "finite-difference step must be positive");
  if (!x.allFinite() || !u.allFinite() || !std::isfinite(t)) {
    raise(ErrorCode::invalid_argument, "probe point must be finite");
  }

  auto finite_or_throw = [](const char* label, const auto& value) {
    bool finite;
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(value)>>) {
      finite = std::isfinite(value);
    } else {
      finite = value.allFinite();
    }
    if (!finite) raise(ErrorCode::non_finite_callback, std::string(label) + " is not finite");
  };

  DiscrepancyReport report;
  auto record = [&](const char* label, bool supplied, const Mat& analytic, const Mat& numeric) {
    finite_or_throw(label, analytic);
    finite_or_throw(label, numeric);
    if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
      raise(ErrorCode::dimension_mismatch, std::string(label) + " has the wrong shape");
    }
    const double d = analytic.size() == 0 ? 0.0 : (analytic - numeric).cwiseAbs().maxCoeff();
    report.entries[label] = {d, supplied};
  };

  finite_or_throw("f", p.f(x, u, t));
  record("f_x", static_cast<bool>(p.jac_fx), p.fx(x, u, t),
         central_jacobian([&](const Vec& xp) { return p.f(xp, u, t); }, x, p.n, h));
  record("f_u", static_cast<bool>(p.jac_fu), p.fu(x, u, t),
         central_jacobian([&](const Vec& up) { return p.f(x, up, t); }, u, p.n, h));

  if (p.running_cost) {
    finite_or_throw("L", p.L(x, u, t));
    record("L_x", static_cast<bool>(p.grad_Lx), p.Lx(x, u, t),
           central_jacobian([&](const Vec& xp) { return as_vec(p.L(xp, u, t)); }, x, 1, h)
               .transpose());
    record("L_u", static_cast<bool>(p.grad_Lu), p.Lu(x, u, t),
           central_jacobian([&](const Vec& up) { return as_vec(p.L(x, up, t)); }, u, 1, h)
               .transpose());
  }
  if (p.terminal_cost) {
    finite_or_throw("phi", p.phi(x, t));
    record("phi_x", static_cast<bool>(p.grad_phix), p.phi_x(x, t),
           central_jacobian([&](const Vec& xp) { return as_vec(p.phi(xp, t)); }, x, 1, h)
               .transpose());
    record("phi_t", static_cast<bool>(p.deriv_phit), as_vec(p.phi_t(x, t)),
           as_vec(central_scalar([&](double tp) { return p.phi(x, tp); }, t, h)));
  }
  if (p.q > 0) {
    finite_or_throw("g", p.g(x, t));
    record("g_x", static_cast<bool>(p.jac_gx), p.gx(x, t),
           central_jacobian([&](const Vec& xp) { return p.g(xp, t); }, x, p.q, h));
    record("g_t", static_cast<bool>(p.deriv_gt), p.gt(x, t),
           (p.g(x, t + h) - p.g(x, t - h)) / (2.0 * h));
  }
  return report;
}

}  // namespace vem
