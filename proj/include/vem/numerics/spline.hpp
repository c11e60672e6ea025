#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vem {

/// Piecewise-cubic interpolant through multi-channel node data.
///
/// With four or more nodes the end conditions are not-a-knot (third
/// derivative continuous across the second and penultimate breakpoints), so
/// any cubic is reproduced exactly. Three nodes give the interpolating
/// parabola and two nodes the chord. Queries outside the breakpoints
/// extrapolate the end pieces.
class SplineCoeffs {
 public:
  SplineCoeffs() = default;

  int channels() const { return static_cast<int>(c0_.cols()); }
  int pieces() const { return static_cast<int>(c0_.rows()); }
  const std::vector<double>& breakpoints() const { return breaks_; }

  Eigen::VectorXd eval(double t) const;
  double eval(double t, int channel) const;
  Eigen::VectorXd derivative(double t) const;

  friend SplineCoeffs spline_build(std::span<const double> nodes, const Eigen::MatrixXd& values);

 private:
  int piece_index(double t) const;

  std::vector<double> breaks_;
  // Row p holds the local-polynomial coefficients of piece p, one column per
  // channel: s(t) = c0 + c1*d + c2*d^2 + c3*d^3 with d = t - breaks_[p].
  Eigen::MatrixXd c0_, c1_, c2_, c3_;
  Eigen::VectorXd last_values_;
};

/// `values` is (nodes x channels). Throws DegenerateGrid for fewer than two
/// nodes or for nodes that are not strictly increasing.
SplineCoeffs spline_build(std::span<const double> nodes, const Eigen::MatrixXd& values);

inline Eigen::VectorXd spline_eval(const SplineCoeffs& s, double t) { return s.eval(t); }

}  // namespace vem
