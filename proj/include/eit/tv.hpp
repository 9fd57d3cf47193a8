#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "eit/mesh.hpp"

namespace eit {

struct TVConfig {
  double T = 1e-6;                  // smoothing parameter, > 0
  std::vector<int> dirichlet_nodes; // nodes pinned by the boundary condition
};

/// Smoothed total variation sum_e vol_e * sqrt(T^2 + |grad sigma|_e^2).
/// Exact for piecewise linear fields (the gradient is constant per element).
double tv_value(const Mesh& mesh, const Eigen::VectorXd& sigma, double T);

/// Lagged-diffusivity stiffness matrix H with coefficient
/// 1/sqrt(T^2 + |grad sigma|^2), rows and columns at the Dirichlet nodes
/// removed, factorized for repeated inverse application.
class TVPreconditioner {
 public:
  TVPreconditioner(const Mesh& mesh, const Eigen::VectorXd& sigma,
                   const TVConfig& cfg);

  Eigen::Index size() const { return H_.rows(); }

  /// H^{-1} v via the sparse Cholesky factorization.
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const;

  /// H v.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return H_ * v; }

  /// Interior rows of the full-matrix product H_full * sigma_full, i.e. the
  /// gradient of the TV functional restricted to the free coordinates.
  Eigen::VectorXd gradient_of_tv(const Eigen::VectorXd& sigma_full) const;

  const Eigen::SparseMatrix<double>& matrix() const { return H_; }
  const Eigen::VectorXd& element_coefficients() const { return coeffs_; }
  const std::vector<int>& free_nodes() const { return free_nodes_; }

 private:
  Eigen::SparseMatrix<double> H_;         // n' x n'
  Eigen::SparseMatrix<double> coupling_;  // n' x n_dirichlet
  Eigen::VectorXd coeffs_;                // per-element coefficient
  std::vector<int> free_nodes_;
  std::vector<int> dirichlet_nodes_;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

inline TVPreconditioner assemble_H(const Mesh& mesh,
                                   const Eigen::VectorXd& sigma,
                                   const TVConfig& cfg) {
  return TVPreconditioner(mesh, sigma, cfg);
}

}  // namespace eit
