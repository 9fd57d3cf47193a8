#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "eit/mesh.hpp"

namespace eit {

/// Squared-exponential covariance entry omega^2 exp(-r^2 / (2 ell^2)).
inline double sq_exp_kernel(double distance, double omega, double ell) {
  return omega * omega * std::exp(-distance * distance / (2.0 * ell * ell));
}

/// Log-normal sampling model for snapshot conductivities and contacts:
///   log sigma ~ N(log sigma0, Gamma0),   log z ~ N(log zeta0, eta^2 I),
/// with Gamma0 the squared-exponential covariance over mesh nodes, held as a
/// factor F with F F^T = Gamma0 + jitter I.
struct FieldPrior {
  Eigen::VectorXd sigma0;      // n
  Eigen::VectorXd log_sigma0;  // n
  double omega = 0.0;
  double ell = 0.0;
  double zeta0 = 0.0;
  double eta = 0.0;
  Eigen::MatrixXd factor;      // n x r
  double jitter = 0.0;
  bool low_rank = false;
};

/// Dense pivoted factorization with jitter 1e-10*omega^2, escalated by three
/// decades before giving up. With low_rank, a randomized truncated
/// eigendecomposition (relative tolerance 1e-8) avoids the n x n storage.
Eigen::MatrixXd build_covariance_factor(const Mesh& mesh, double omega,
                                        double ell, bool low_rank = false,
                                        double* jitter_out = nullptr);

FieldPrior build_field_prior(const Mesh& mesh, const Eigen::VectorXd& sigma0,
                             double omega, double ell, double zeta0, double eta,
                             bool low_rank = false);

/// sigma = exp(log sigma0 + F xi), xi standard normal; strictly positive and
/// reproducible per seed.
Eigen::VectorXd sample_sigma(const FieldPrior& prior, std::uint64_t seed);

/// Componentwise log-normal contact resistances, length M.
Eigen::VectorXd sample_contacts(const FieldPrior& prior, int M,
                                std::uint64_t seed);

}  // namespace eit
