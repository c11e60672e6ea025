#include "vem/numerics/spline.hpp"

#include <algorithm>
#include <string>

#include "vem/error.hpp"

namespace vem {

SplineCoeffs spline_build(std::span<const double> nodes, const Eigen::MatrixXd& values) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  if (n < 2) raise(ErrorCode::degenerate_grid, "spline needs at least two nodes");
  if (values.rows() != n) {
    raise(ErrorCode::dimension_mismatch, "spline values have " + std::to_string(values.rows()) +
                                             " rows for " + std::to_string(n) + " nodes");
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (!(nodes[i + 1] > nodes[i])) {
      raise(ErrorCode::degenerate_grid, "spline nodes must be strictly increasing");
    }
  }

  const Eigen::Index channels = values.cols();
  const Eigen::Index pieces = n - 1;
  Eigen::VectorXd h(pieces);
  Eigen::MatrixXd delta(pieces, channels);
  for (Eigen::Index i = 0; i < pieces; ++i) {
    h[i] = nodes[i + 1] - nodes[i];
    delta.row(i) = (values.row(i + 1) - values.row(i)) / h[i];
  }

  SplineCoeffs s;
  s.breaks_.assign(nodes.begin(), nodes.end());
  s.c0_ = values.topRows(pieces);
  s.last_values_ = values.row(n - 1).transpose();
  s.c1_.resize(pieces, channels);
  s.c2_.setZero(pieces, channels);
  s.c3_.setZero(pieces, channels);

  if (n == 2) {
    s.c1_ = delta;
    return s;
  }
  if (n == 3) {
    const Eigen::RowVectorXd curvature = (delta.row(1) - delta.row(0)) / (nodes[2] - nodes[0]);
    s.c1_.row(0) = delta.row(0) - curvature * h[0];
    s.c1_.row(1) = delta.row(0) + curvature * h[0];
    s.c2_.row(0) = curvature;
    s.c2_.row(1) = curvature;
    return s;
  }

  // Tridiagonal system for the node slopes: sub[i]*s[i-1] + diag[i]*s[i] + sup[i]*s[i+1] = rhs[i].
  Eigen::VectorXd sub = Eigen::VectorXd::Zero(n), diag(n), sup = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd rhs(n, channels);

  const double x31 = h[0] + h[1];
  diag[0] = h[1];
  sup[0] = x31;
  rhs.row(0) = ((h[0] + 2.0 * x31) * h[1] * delta.row(0) + h[0] * h[0] * delta.row(1)) / x31;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    sub[i] = h[i];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    sup[i] = h[i - 1];
    rhs.row(i) = 3.0 * (h[i] * delta.row(i - 1) + h[i - 1] * delta.row(i));
  }
  const double xn = h[pieces - 1] + h[pieces - 2];
  sub[n - 1] = xn;
  diag[n - 1] = h[pieces - 2];
  rhs.row(n - 1) = (h[pieces - 1] * h[pieces - 1] * delta.row(pieces - 2) +
                    (2.0 * xn + h[pieces - 1]) * h[pieces - 2] * delta.row(pieces - 1)) /
                   xn;

  // Thomas elimination; the not-a-knot rows stay nonsingular for increasing nodes.
  for (Eigen::Index i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs.row(i) -= w * rhs.row(i - 1);
  }
  Eigen::MatrixXd slope(n, channels);
  slope.row(n - 1) = rhs.row(n - 1) / diag[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    slope.row(i) = (rhs.row(i) - sup[i] * slope.row(i + 1)) / diag[i];
  }

  for (Eigen::Index i = 0; i < pieces; ++i) {
    s.c1_.row(i) = slope.row(i);
    s.c2_.row(i) = (3.0 * delta.row(i) - 2.0 * slope.row(i) - slope.row(i + 1)) / h[i];
    s.c3_.row(i) = (slope.row(i) + slope.row(i + 1) - 2.0 * delta.row(i)) / (h[i] * h[i]);
  }
  return s;
}

int SplineCoeffs::piece_index(double t) const {
  const auto last = static_cast<int>(breaks_.size()) - 2;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const int idx = static_cast<int>(it - breaks_.begin()) - 1;
  return std::clamp(idx, 0, last);
}

Eigen::VectorXd SplineCoeffs::eval(double t) const {
  if (t == breaks_.back()) return last_values_;
  const int p = piece_index(t);
  const double d = t - breaks_[p];
  return (c0_.row(p) + d * (c1_.row(p) + d * (c2_.row(p) + d * c3_.row(p)))).transpose();
}

double SplineCoeffs::eval(double t, int channel) const {
  if (t == breaks_.back()) return last_values_[channel];
  const int p = piece_index(t);
  const double d = t - breaks_[p];
  return c0_(p, channel) + d * (c1_(p, channel) + d * (c2_(p, channel) + d * c3_(p, channel)));
}

Eigen::VectorXd SplineCoeffs::derivative(double t) const {
  const int p = piece_index(t);
  const double d = t - breaks_[p];
  return (c1_.row(p) + d * (2.0 * c2_.row(p) + 3.0 * d * c3_.row(p))).transpose();
}

}  // namespace vem
