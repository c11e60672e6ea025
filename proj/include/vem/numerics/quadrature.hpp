#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vem/error.hpp"

namespace vem {

namespace detail {
inline void check_grid(std::span<const double> grid, std::size_t samples) {
  if (grid.size() < 2) raise(ErrorCode::degenerate_grid, "quadrature needs at least two nodes");
  if (samples != grid.size()) {
    raise(ErrorCode::dimension_mismatch, std::to_string(samples) + " samples for " +
                                             std::to_string(grid.size()) + " grid nodes");
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i + 1] > grid[i])) {
      raise(ErrorCode::degenerate_grid, "quadrature grid must be strictly increasing");
    }
  }
}
}  // namespace detail

// Composite trapezoidal rule over node samples. T may be a scalar or any
// fixed-shape Eigen object; summation order is fixed left to right.
template <typename T>
T grid_quadrature(std::span<const double> grid, const std::vector<T>& samples) {
  detail::check_grid(grid, samples.size());
  T total = 0.5 * (grid[1] - grid[0]) * (samples[0] + samples[1]);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    total += 0.5 * (grid[i + 1] - grid[i]) * (samples[i] + samples[i + 1]);
  }
  return total;
}

inline double grid_quadrature(std::span<const double> grid, std::span<const double> samples) {
  return grid_quadrature(grid, std::vector<double>(samples.begin(), samples.end()));
}

/// Composite Simpson rule on a uniform grid; with an odd number of intervals the
/// last three are covered by the 3/8 rule. Exact for cubics; falls back to the
/// trapezoid rule below four nodes.
inline double simpson_quadrature(std::span<const double> grid, std::span<const double> samples) {
  detail::check_grid(grid, samples.size());
  const std::size_t intervals = grid.size() - 1;
  if (intervals < 2) return grid_quadrature(grid, samples);
  const double h = (grid.back() - grid.front()) / static_cast<double>(intervals);
  const std::size_t simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < simpson_end; i += 2) {
    total += h / 3.0 * (samples[i] + 4.0 * samples[i + 1] + samples[i + 2]);
  }
  if (simpson_end != intervals) {
    const std::size_t i = simpson_end;
    total += 3.0 * h / 8.0 *
             (samples[i] + 3.0 * samples[i + 1] + 3.0 * samples[i + 2] + samples[i + 3]);
  }
  return total;
}

/// result[i] = integral from grid[i] to grid.back(); result.back() is zero.
template <typename T>
std::vector<T> cumulative_from_right(std::span<const double> grid, const std::vector<T>& samples) {
  detail::check_grid(grid, samples.size());
  std::vector<T> out(samples.size());
  const std::size_t last = samples.size() - 1;
  out[last] = 0.0 * samples[last];
  for (std::size_t i = last; i-- > 0;) {
    out[i] = out[i + 1] + 0.5 * (grid[i + 1] - grid[i]) * (samples[i] + samples[i + 1]);
  }
  return out;
}

}  // namespace vem
