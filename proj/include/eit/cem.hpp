#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "eit/mesh.hpp"

namespace eit {

/// Deterministic orthonormal basis of the zero-sum subspace of R^M
/// (orthonormalized differences): column m has m+1 leading entries
/// 1/sqrt((m+1)(m+2)) followed by -(m+1)/sqrt((m+1)(m+2)).
Eigen::MatrixXd build_current_basis(int M);

struct CurrentPatterns {
  Eigen::MatrixXd currents;  // M x L, every column sums to zero
  Eigen::Index count() const { return currents.cols(); }
};

/// Patterns equal to the basis columns themselves (L = M-1).
CurrentPatterns basis_patterns(const Eigen::MatrixXd& C);
/// Adjacent-pair injections e_l - e_{l+1} (L = M-1).
CurrentPatterns pair_patterns(int M);
/// Throws unless every column is zero-sum and the columns are independent.
void validate_patterns(const CurrentPatterns& patterns, int M);

/// FE system with the conductivity and contact dependence kept affine:
///   A(sigma,z) = sum_l sigma_l dA_l + sum_m (1/z_m) B_m,
/// where dA_l is the stiffness increment of the nodal hat function of node l
/// (kept implicit through per-element contributions) and B_m is the contact
/// block of electrode m. Immutable after construction.
struct AffineSystem {
  std::shared_ptr<const Mesh> mesh;
  ElectrodeLayout layout;
  Eigen::MatrixXd C;  // M x (M-1) current basis

  Eigen::Index N = 0;  // interior dofs (= mesh nodes)
  int M = 0;

  // Sparsity pattern of A with zero values; refilled per (sigma, z).
  Eigen::SparseMatrix<double> pattern;
  // Per element: (d+1)^2 local stiffness entries vol_e * g_i . g_j and the
  // matching value-array offsets in `pattern`.
  Eigen::MatrixXd element_stiffness;   // E x (d+1)^2
  Eigen::MatrixXi element_offsets;     // E x (d+1)^2
  // Contact blocks, both as standalone matrices (for Jacobian contractions)
  // and as offset/value scatter lists (for assembly).
  std::vector<Eigen::SparseMatrix<double>> contact_blocks;          // M
  std::vector<std::vector<std::pair<int, double>>> contact_scatter;  // M

  Eigen::Index size() const { return N + M - 1; }
};

AffineSystem assemble_affine(std::shared_ptr<const Mesh> mesh,
                             ElectrodeLayout layout, Eigen::MatrixXd C);

/// Full system matrix at the given coefficients (symmetric positive
/// definite for positive sigma and z).
Eigen::SparseMatrix<double> assemble_A(const AffineSystem& sys,
                                       const Eigen::VectorXd& sigma,
                                       const Eigen::VectorXd& z);

/// Interior stiffness block only: sum_l sigma_l dA_l as an N x N matrix.
Eigen::SparseMatrix<double> assemble_interior_stiffness(
    const Mesh& mesh, const Eigen::VectorXd& sigma);

/// Consistent FE mass matrix (for mass-weighted norms of nodal fields).
Eigen::SparseMatrix<double> assemble_mass(const Mesh& mesh);

struct ForwardSolution {
  Eigen::MatrixXd X;     // (N+M-1) x L nodal solutions per pattern
  Eigen::MatrixXd X0;    // (N+M-1) x M auxiliary solutions (basis loads)
  Eigen::MatrixXd U;     // M x L electrode voltages, columns zero-sum
  Eigen::VectorXd Uvec;  // length L*M, columnwise stacking of U
};

/// Solves A(sigma,z) X = [0; C^T I] and A X0 = [0; C^T] with one sparse
/// Cholesky factorization, and extracts electrode voltages U = C X_bottom.
ForwardSolution solve_forward(const AffineSystem& sys,
                              const Eigen::VectorXd& sigma,
                              const Eigen::VectorXd& z,
                              const CurrentPatterns& patterns);

/// Columnwise stacking of an M x L matrix into a length-LM vector.
inline Eigen::VectorXd vectorize(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace eit
