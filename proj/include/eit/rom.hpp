#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "eit/cem.hpp"
#include "eit/sampling.hpp"

namespace eit {

struct DrawRecord {
  std::uint64_t draw_index = 0;
  std::uint64_t sigma_seed = 0;
  std::uint64_t z_seed = 0;
  Eigen::VectorXd sigma;
  Eigen::VectorXd z;
};

struct SnapshotLibrary {
  Eigen::MatrixXd Y;               // N x columns, interior potential blocks
  std::vector<DrawRecord> records;
  std::uint64_t seed = 0;
  int requested = 0;               // K from the configuration
  bool count_columns = false;      // K counted columns instead of draws
};

/// Draws (sigma, z) from the prior, runs the full forward solve and collects
/// the interior blocks of X as snapshot columns (all L patterns per draw).
/// Failed draws are skipped with a note on `log` and do not consume K.
SnapshotLibrary generate_snapshots(const AffineSystem& sys,
                                   const FieldPrior& prior, int K,
                                   const CurrentPatterns& patterns,
                                   std::uint64_t seed,
                                   bool count_columns = false,
                                   std::ostream* log = nullptr);

struct ReducedBasis {
  Eigen::MatrixXd Qhat;            // N x k, orthonormal columns
  Eigen::VectorXd singular_values; // retained spectrum, nonincreasing
  int k = 0;
  bool rank_deficient = false;     // achieved rank fell short of the request

  // Provenance for persistence.
  std::uint64_t snapshot_seed = 0;
  int draws = 0;
  double omega = 0, ell = 0, eta = 0, zeta0 = 0;
  Eigen::VectorXd sigma0;
  int electrode_count = 0;
};

/// Randomized range finder (Gaussian test matrix, oversampled by p, q power
/// iterations with re-orthonormalization) followed by the SVD of the small
/// projected matrix, truncated to k columns.
ReducedBasis pod_basis(const SnapshotLibrary& lib, int k, int oversampling = 10,
                       int power_iters = 1, std::uint64_t seed = 0x5eedULL);

/// Leading-k sub-basis of an existing basis (valid because the columns are
/// ordered by singular value).
ReducedBasis truncate_basis(const ReducedBasis& basis, int k);

/// Offline products of the block basis Q = [Qhat 0; 0 I] with the affine
/// system: dense reduced contact blocks plus a prepared interior stiffness
/// pattern. Online, Q^T A(sigma,z) Q costs one sparse refill and the two
/// basis multiplications Qhat^T (K(sigma) Qhat); the full (N+M-1)-sized A is
/// never assembled or factorized.
struct ReducedSystem {
  std::shared_ptr<const Mesh> mesh;
  Eigen::MatrixXd Qhat;  // N x k
  Eigen::MatrixXd C;     // M x (M-1)
  Eigen::Index N = 0;
  int M = 0;
  int k = 0;

  // Interior stiffness sparsity with per-element value offsets, so the
  // sigma-dependent refill is a scatter-add without re-sorting triplets.
  Eigen::SparseMatrix<double> interior_pattern;  // N x N
  Eigen::MatrixXd element_stiffness;             // E x (d+1)^2
  Eigen::MatrixXi element_offsets;               // E x (d+1)^2
  std::vector<Eigen::MatrixXd> contact_reduced;  // M of (k+M-1)^2

  Eigen::Index size() const { return k + M - 1; }
};

ReducedSystem reduce_system(const AffineSystem& sys, const ReducedBasis& basis);

/// Dense reduced system matrix Q^T A(sigma,z) Q.
Eigen::MatrixXd assemble_reduced_A(const ReducedSystem& rsys,
                                   const Eigen::VectorXd& sigma,
                                   const Eigen::VectorXd& z);

/// Solves the reduced systems for X-hat and X0-hat and lifts back to full
/// dimension, so voltages and Jacobian contractions follow the full path.
ForwardSolution solve_reduced(const ReducedSystem& rsys,
                              const Eigen::VectorXd& sigma,
                              const Eigen::VectorXd& z,
                              const CurrentPatterns& patterns);

/// Binary persistence with bit-exact round trip.
void save_basis(const std::string& path, const ReducedBasis& basis);
ReducedBasis load_basis(const std::string& path);

}  // namespace eit
