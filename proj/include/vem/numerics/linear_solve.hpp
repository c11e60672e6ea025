#pragma once

#include <Eigen/Dense>

namespace vem {

struct DenseSolution {
  Eigen::VectorXd x;
  double condition = 1.0;  // 2-norm condition number of the system matrix
};

inline constexpr double kMaxCondition = 1e12;

/// Solves M x = rhs for small dense systems. Throws SingularSystem when the
/// condition estimate exceeds kMaxCondition.
DenseSolution solve_dense(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs);

}  // namespace vem
