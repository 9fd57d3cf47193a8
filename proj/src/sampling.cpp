#include "eit/sampling.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "eit/common.hpp"
#include "eit/rng.hpp"

namespace eit {

namespace {

Eigen::MatrixXd dense_factor(const Mesh& mesh, double omega, double ell,
                             double* jitter_out) {
  const Eigen::Index n = mesh.node_count();
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    cov(j, j) = omega * omega;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double r = (mesh.nodes.row(i) - mesh.nodes.row(j)).norm();
      cov(i, j) = cov(j, i) = sq_exp_kernel(r, omega, ell);
    }
  }

  double jitter = 1e-10 * omega * omega;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd shifted = cov;
    shifted.diagonal().array() += jitter;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
    const Eigen::VectorXd D = ldlt.vectorD();
    if (ldlt.info() == Eigen::Success &&
        D.minCoeff() >= -1e-12 * D.maxCoeff()) {
      Eigen::MatrixXd F = ldlt.matrixL();
      F *= D.cwiseMax(0.0).cwiseSqrt().asDiagonal();
      F = ldlt.transpositionsP().transpose() * F;
      if (jitter_out) *jitter_out = jitter;
      return F;
    }
    jitter *= 10.0;  // escalate one decade
  }
  throw Error("covariance factor: factorization failed after jitter escalation");
}

// Randomized truncated eigendecomposition of the kernel matrix without
// forming it: matvecs are evaluated in row blocks.
Eigen::MatrixXd low_rank_factor(const Mesh& mesh, double omega, double ell,
                                double* jitter_out) {
  const Eigen::Index n = mesh.node_count();
  const Eigen::Index block = 512;

  auto kernel_mul = [&](const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Y(n, X.cols());
    Eigen::MatrixXd kb;
    for (Eigen::Index r0 = 0; r0 < n; r0 += block) {
      const Eigen::Index rows = std::min(block, n - r0);
      kb.resize(rows, n);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          kb(i, j) = sq_exp_kernel(
              (mesh.nodes.row(r0 + i) - mesh.nodes.row(j)).norm(), omega, ell);
      Y.middleRows(r0, rows) = kb * X;
    }
    return Y;
  };

  Eigen::Index rank = std::min<Eigen::Index>(n, 128);
  const double tol = 1e-8;
  while (true) {
    const Eigen::Index p = std::min<Eigen::Index>(n - rank, 10);
    Eigen::MatrixXd omega_mat = standard_normal_matrix(n, rank + p, 0x9e37u);
    Eigen::MatrixXd G = kernel_mul(omega_mat);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(n, rank + p);
    // One power iteration sharpens the subspace; the kernel is symmetric.
    Q = kernel_mul(Q);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr2(Q);
    Q = qr2.householderQ() * Eigen::MatrixXd::Identity(n, rank + p);

    const Eigen::MatrixXd T = Q.transpose() * kernel_mul(Q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (T + T.transpose()));
    Eigen::VectorXd vals = eig.eigenvalues().reverse();
    Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();

    Eigen::Index keep = 0;
    while (keep < vals.size() && vals[keep] > tol * vals[0]) ++keep;
    if (keep < rank + p || rank + p >= n) {
      Eigen::MatrixXd F =
          (Q * vecs.leftCols(keep)) *
          vals.head(keep).cwiseMax(0.0).cwiseSqrt().asDiagonal();
      if (jitter_out) *jitter_out = 0.0;
      return F;
    }
    rank = std::min(n, 2 * rank);  // spectrum not yet resolved
  }
}

}  // namespace

Eigen::MatrixXd build_covariance_factor(const Mesh& mesh, double omega,
                                        double ell, bool low_rank,
                                        double* jitter_out) {
  if (!(omega > 0) || !(ell > 0))
    throw Error("covariance factor: omega and ell must be positive");
  return low_rank ? low_rank_factor(mesh, omega, ell, jitter_out)
                  : dense_factor(mesh, omega, ell, jitter_out);
}

FieldPrior build_field_prior(const Mesh& mesh, const Eigen::VectorXd& sigma0,
                             double omega, double ell, double zeta0, double eta,
                             bool low_rank) {
  if (sigma0.size() != mesh.node_count())
    throw Error("field prior: sigma0 length != node count");
  if ((sigma0.array() <= 0).any())
    throw Error("field prior: sigma0 must be positive");
  if (!(zeta0 > 0)) throw Error("field prior: zeta0 must be positive");
  if (eta < 0) throw Error("field prior: eta must be nonnegative");

  FieldPrior p;
  p.sigma0 = sigma0;
  p.log_sigma0 = sigma0.array().log();
  p.omega = omega;
  p.ell = ell;
  p.zeta0 = zeta0;
  p.eta = eta;
  p.low_rank = low_rank;
  if (omega > 0) {
    p.factor = build_covariance_factor(mesh, omega, ell, low_rank, &p.jitter);
  } else {
    p.factor = Eigen::MatrixXd::Zero(mesh.node_count(), 1);
  }
  return p;
}

Eigen::VectorXd sample_sigma(const FieldPrior& prior, std::uint64_t seed) {
  if (prior.omega == 0.0) return prior.sigma0;  // degenerate distribution
  const Eigen::VectorXd xi = standard_normal_vector(prior.factor.cols(), seed);
  return (prior.log_sigma0 + prior.factor * xi).array().exp();
}

Eigen::VectorXd sample_contacts(const FieldPrior& prior, int M,
                                std::uint64_t seed) {
  const Eigen::VectorXd xi = standard_normal_vector(M, seed);
  return (prior.eta * xi.array()).exp() * prior.zeta0;
}

}  // namespace eit
