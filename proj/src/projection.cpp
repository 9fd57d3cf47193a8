#include "eit/projection.hpp"

#include <Eigen/Dense>

#include "eit/common.hpp"

namespace eit {

ProjectionOperator build_projection(const Eigen::MatrixXd& Jz) {
  if (Jz.rows() < Jz.cols() || Jz.cols() < 1)
    throw Error("build_projection: J_z must be tall with >= 1 column");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Jz);
  const double smax = svd.singularValues()[0];
  const double smin = svd.singularValues()[svd.singularValues().size() - 1];
  // cond(J_z^T J_z) = (smax/smin)^2
  if (!(smin > 0) || (smax / smin) * (smax / smin) > 1e14)
    throw Error("build_projection: J_z numerically rank deficient");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Jz);
  Eigen::MatrixXd Q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(Jz.rows(), Jz.cols());
  return ProjectionOperator(std::move(Q));
}

}  // namespace eit
