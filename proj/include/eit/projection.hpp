#pragma once

#include <Eigen/Core>
#include <cmath>

namespace eit {

/// Additive noise model Gamma = gamma^2 I with the Morozov level
/// epsilon = sqrt(LM) (optionally scaled for experimentation).
struct NoiseModel {
  double gamma = 0.0;  // standard deviation, voltage units
  int L = 0;           // current patterns
  int M = 0;           // electrodes
  double morozov_scale = 1.0;

  double epsilon() const {
    return morozov_scale * std::sqrt(double(L) * double(M));
  }
};

/// Orthogonal projection onto the complement of range(J_z), held in low-rank
/// correction form P v = v - Qz (Qz^T v) with Qz an orthonormal basis of
/// range(J_z). Algebraically identical to I - J_z (J_z^T J_z)^{-1} J_z^T.
class ProjectionOperator {
 public:
  ProjectionOperator() = default;
  explicit ProjectionOperator(Eigen::MatrixXd range_basis)
      : Qz_(std::move(range_basis)) {}

  Eigen::Index dimension() const { return Qz_.rows(); }
  Eigen::Index rank_removed() const { return Qz_.cols(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return v - Qz_ * (Qz_.transpose() * v);
  }
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& m) const {
    return m - Qz_ * (Qz_.transpose() * m);
  }

  /// Whitened projector Sigma_w v = P v / gamma.
  Eigen::VectorXd apply_whitened(const Eigen::VectorXd& v, double gamma) const {
    return apply(v) / gamma;
  }

  /// Dense LM x LM realization, for diagnostics and small-scale tests.
  Eigen::MatrixXd dense() const {
    const Eigen::Index n = Qz_.rows();
    return Eigen::MatrixXd::Identity(n, n) - Qz_ * Qz_.transpose();
  }

 private:
  Eigen::MatrixXd Qz_;  // LM x M, orthonormal columns
};

/// Builds the projector from the contact Jacobian at the initial guess.
/// Throws when J_z is numerically rank deficient (cond(J_z^T J_z) > 1e14).
ProjectionOperator build_projection(const Eigen::MatrixXd& Jz);

}  // namespace eit
