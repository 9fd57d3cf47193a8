#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "eit/tv.hpp"

namespace eit {

/// Matrix-free linear operator with explicit transpose action.
struct LinearOperator {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_transpose;
};

struct LsqrOptions {
  double epsilon = 0.0;     // discrepancy stopping level on ||b - B x||
  int max_iterations = 200;
};

struct LsqrResult {
  Eigen::VectorXd solution;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // ||b - B x_j|| after each iteration
};

/// LSQR on the right-priorconditioned system B H^{-1/2}, with iterates kept
/// in the original variable so that only products with B, B^T and H^{-1} are
/// required (no Cholesky factor of H is referenced). Returns the first
/// iterate whose residual drops to epsilon, or the max_iterations-th iterate
/// flagged unconverged. Residual norms are monotonically nonincreasing.
LsqrResult priorcond_lsqr(const LinearOperator& B, const Eigen::VectorXd& b,
                          const TVPreconditioner& prec,
                          const LsqrOptions& opts);

}  // namespace eit
