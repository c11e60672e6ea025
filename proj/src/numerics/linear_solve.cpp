#include "vem/numerics/linear_solve.hpp"

#include <limits>
#include <sstream>

#include "vem/error.hpp"

namespace vem {

DenseSolution solve_dense(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs) {
  if (M.rows() < 1 || M.rows() != M.cols() || rhs.size() != M.rows()) {
    raise(ErrorCode::dimension_mismatch, "solve_dense expects a square system matching rhs");
  }
  if (!M.allFinite() || !rhs.allFinite()) {
    raise(ErrorCode::singular_system, "system matrix or right-hand side is not finite");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  DenseSolution out;
  out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(out.condition <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "condition estimate " << out.condition << " exceeds " << kMaxCondition
        << " (rank-deficient constraint Jacobian or uncontrollable terminal directions)";
    raise(ErrorCode::singular_system, msg.str());
  }
  out.x = M.partialPivLu().solve(rhs);
  return out;
}

}  // namespace vem
