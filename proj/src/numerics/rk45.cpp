#include "vem/numerics/rk45.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vem/error.hpp"

namespace vem {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

class Evaluator {
 public:
  explicit Evaluator(const VectorField& field) : field_(field) {}

  Eigen::VectorXd operator()(double t, const Eigen::VectorXd& y) {
    ++count;
    Eigen::VectorXd dy = field_(t, y);
    if (dy.size() != y.size()) {
      raise(ErrorCode::dimension_mismatch, "vector field returned length " +
                                               std::to_string(dy.size()) + ", expected " +
                                               std::to_string(y.size()));
    }
    if (!dy.allFinite()) {
      raise(ErrorCode::non_finite_field, "vector field returned non-finite values at t = " +
                                             std::to_string(t));
    }
    return dy;
  }

  long count = 0;

 private:
  const VectorField& field_;
};

struct Stages {
  Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7;
  Eigen::VectorXd y_new;
};

void take_step(Evaluator& f, double t, const Eigen::VectorXd& y, double h, Stages& s) {
  s.k2 = f(t + c2 * h, y + h * (a21 * s.k1));
  s.k3 = f(t + c3 * h, y + h * (a31 * s.k1 + a32 * s.k2));
  s.k4 = f(t + c4 * h, y + h * (a41 * s.k1 + a42 * s.k2 + a43 * s.k3));
  s.k5 = f(t + c5 * h, y + h * (a51 * s.k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4));
  s.k6 = f(t + h, y + h * (a61 * s.k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5));
  s.y_new = y + h * (a71 * s.k1 + a73 * s.k3 + a74 * s.k4 + a75 * s.k5 + a76 * s.k6);
  s.k7 = f(t + h, s.y_new);
}

double error_norm(const Stages& s, const Eigen::VectorXd& y, double h,
                  const IntegratorOptions& opts) {
  const Eigen::VectorXd err =
      h * (e1 * s.k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 + e7 * s.k7);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double scale = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(s.y_new[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

double rms_scaled(const Eigen::VectorXd& v, const Eigen::VectorXd& y,
                  const IntegratorOptions& opts) {
  if (v.size() == 0) return 0.0;
  const Eigen::ArrayXd scale = opts.atol + opts.rtol * y.array().abs();
  return std::sqrt((v.array() / scale).square().mean());
}

// Starting step heuristic from Hairer, Norsett & Wanner.
double initial_step(Evaluator& f, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& f0,
                    double span, const IntegratorOptions& opts) {
  const double direction = span > 0 ? 1.0 : -1.0;
  const double d0 = rms_scaled(y, y, opts);
  const double d1n = rms_scaled(f0, y, opts);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, std::abs(span));
  const Eigen::VectorXd f1 = f(t + direction * h0, y + direction * h0 * f0);
  const double d2 = rms_scaled(f1 - f0, y, opts) / h0;
  const double dmax = std::max(d1n, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, std::abs(span)});
}

}  // namespace

void IntegratorOptions::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) {
    raise(ErrorCode::invalid_argument, "integrator tolerances must be positive");
  }
  if (max_steps < 1) raise(ErrorCode::invalid_argument, "max_steps must be at least 1");
  if (max_step && !(*max_step > 0.0)) raise(ErrorCode::invalid_argument, "max_step must be positive");
  if (initial_step && !(*initial_step > 0.0)) {
    raise(ErrorCode::invalid_argument, "initial_step must be positive");
  }
}

Eigen::VectorXd StepSegment::eval(double t) const {
  const double theta = h == 0.0 ? 0.0 : (t - t_begin) / h;
  const double theta1 = 1.0 - theta;
  return coeffs[0] +
         theta * (coeffs[1] + theta1 * (coeffs[2] + theta * (coeffs[3] + theta1 * coeffs[4])));
}

SolutionPath::SolutionPath(double t_start, Eigen::VectorXd y_start)
    : t_start_(t_start), y_start_(std::move(y_start)), y_stop_(y_start_) {}

void SolutionPath::append(StepSegment segment) {
  y_stop_ = segment.coeffs[0] + segment.coeffs[1];
  segments_.push_back(std::move(segment));
}

Eigen::VectorXd SolutionPath::eval(double t) const {
  if (segments_.empty()) return y_start_;
  const bool forward = segments_.front().h > 0.0;
  const double lo = forward ? t_start_ : t_stop();
  const double hi = forward ? t_stop() : t_start_;
  if (t <= lo) return forward ? y_start_ : y_stop_;
  if (t >= hi) return forward ? y_stop_ : y_start_;
  // Segments are ordered along the integration direction.
  auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                             [forward](const StepSegment& s, double value) {
                               return forward ? s.t_end() < value : s.t_end() > value;
                             });
  if (it == segments_.end()) it = std::prev(segments_.end());
  return it->eval(t);
}

IntegrationOutcome rk45_drive(const VectorField& field, const Eigen::VectorXd& y0, double t_start,
                              double t_stop, const IntegratorOptions& opts,
                              const StepObserver& observer) {
  opts.validate();
  if (!y0.allFinite()) raise(ErrorCode::non_finite_field, "initial state is not finite");

  IntegrationOutcome out;
  out.t_reached = t_start;
  out.y = y0;
  const double span = t_stop - t_start;
  if (span == 0.0) return out;

  Evaluator f(field);
  const double direction = span > 0 ? 1.0 : -1.0;
  double t = t_start;
  Eigen::VectorXd y = y0;
  Stages s;
  s.k1 = f(t, y);

  double h_abs = opts.initial_step ? std::min(*opts.initial_step, std::abs(span))
                                   : initial_step(f, t, y, s.k1, span, opts);
  const double max_step = opts.max_step.value_or(0.1 * std::abs(span));
  bool last_rejected = false;

  while (true) {
    h_abs = std::min(h_abs, max_step);
    const double remaining = std::abs(t_stop - t);
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() *
                            std::max(std::abs(t), std::abs(t_stop));
    bool final_step = false;
    if (h_abs >= remaining || remaining - h_abs <= min_step) {
      h_abs = remaining;
      final_step = true;
    }
    if (h_abs < min_step) {
      raise(ErrorCode::step_failure, "step size underflow at t = " + std::to_string(t));
    }
    if (out.stats.accepted + out.stats.rejected >= opts.max_steps) {
      raise(ErrorCode::step_failure,
            "maximum number of steps (" + std::to_string(opts.max_steps) + ") exceeded");
    }

    const double h = direction * h_abs;
    take_step(f, t, y, h, s);
    const double err = error_norm(s, y, h, opts);

    if (err <= 1.0) {
      ++out.stats.accepted;
      StepSegment seg;
      seg.t_begin = t;
      seg.h = h;
      const Eigen::VectorXd ydiff = s.y_new - y;
      const Eigen::VectorXd bspl = h * s.k1 - ydiff;
      seg.coeffs[0] = y;
      seg.coeffs[1] = ydiff;
      seg.coeffs[2] = bspl;
      seg.coeffs[3] = ydiff - h * s.k7 - bspl;
      seg.coeffs[4] = h * (d1 * s.k1 + d3 * s.k3 + d4 * s.k4 + d5 * s.k5 + d6 * s.k6 + d7 * s.k7);

      t = final_step ? t_stop : t + h;
      y = s.y_new;
      s.k1 = s.k7;  // first same as last
      const bool keep_going = observer ? observer(seg, y) : true;
      if (!keep_going || final_step) {
        out.stopped_by_observer = !keep_going && !final_step;
        break;
      }

      double factor = err == 0.0 ? kMaxFactor : kSafety * std::pow(err, -0.2);
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      if (last_rejected) factor = std::min(factor, 1.0);
      h_abs *= factor;
      last_rejected = false;
    } else {
      ++out.stats.rejected;
      const double factor = std::max(kMinFactor, kSafety * std::pow(err, -0.2));
      h_abs *= factor;
      last_rejected = true;
    }
  }

  out.t_reached = t;
  out.y = y;
  out.stats.evaluations = f.count;
  return out;
}

SolutionPath rk45_integrate(const VectorField& field, const Eigen::VectorXd& y0, double t_start,
                            double t_stop, const IntegratorOptions& opts) {
  SolutionPath path(t_start, y0);
  const auto outcome = rk45_drive(field, y0, t_start, t_stop, opts,
                                  [&path](const StepSegment& seg, const Eigen::VectorXd&) {
                                    path.append(seg);
                                    return true;
                                  });
  path.stats = outcome.stats;
  return path;
}

Eigen::VectorXd rk45_fixed(const VectorField& field, const Eigen::VectorXd& y0, double t_start,
                           double t_stop, int steps) {
  if (steps < 1) raise(ErrorCode::invalid_argument, "fixed-step integration needs >= 1 step");
  Evaluator f(field);
  const double h = (t_stop - t_start) / steps;
  Eigen::VectorXd y = y0;
  Stages s;
  for (int i = 0; i < steps; ++i) {
    const double t = t_start + i * h;
    s.k1 = f(t, y);
    take_step(f, t, y, h, s);
    y = s.y_new;
  }
  return y;
}

}  // namespace vem
