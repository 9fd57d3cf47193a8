#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "eit/cem.hpp"
#include "eit/projection.hpp"
#include "eit/rom.hpp"
#include "eit/sensitivity.hpp"

namespace eit {

struct InversionConfig {
  double T = 1e-6;        // TV smoothing parameter
  double delta = 1e-2;    // lowest allowed conductivity after clamping
  int max_outer = 50;
  int max_inner = 200;
  double alpha_diagnostic = 1.0;  // weight of the TV term in the logged value
  int divergence_limit = 5;       // consecutive growth steps before aborting
};

struct IterationRecord {
  int iteration = 0;          // 1-based outer index
  int inner_iterations = 0;
  bool inner_converged = false;
  double discrepancy = 0.0;   // ||Sigma (V - U)|| after the update
  double objective = 0.0;     // diagnostic Phi_P at the new iterate
  double forward_seconds = 0.0;
  double jacobian_seconds = 0.0;
  double inner_seconds = 0.0;
  double total_seconds = 0.0;
};

struct ReconstructionResult {
  Eigen::VectorXd sigma;  // full nodal field, electrode nodes at sigma0
  bool converged = false;
  bool aborted_divergence = false;
  int outer_iterations = 0;
  double epsilon = 0.0;
  double initial_discrepancy = 0.0;
  double final_discrepancy = 0.0;
  std::vector<IterationRecord> history;
  std::string engine;
};

/// Forward solver abstraction: the outer loop is identical for the full
/// sparse path and the reduced-basis path.
class ForwardEngine {
 public:
  virtual ~ForwardEngine() = default;
  virtual ForwardSolution solve(const Eigen::VectorXd& sigma,
                                const Eigen::VectorXd& z) = 0;
  virtual std::string name() const = 0;
};

class FullEngine final : public ForwardEngine {
 public:
  FullEngine(const AffineSystem& sys, const CurrentPatterns& patterns)
      : sys_(sys), patterns_(patterns) {}
  ForwardSolution solve(const Eigen::VectorXd& sigma,
                        const Eigen::VectorXd& z) override {
    return solve_forward(sys_, sigma, z, patterns_);
  }
  std::string name() const override { return "full"; }

 private:
  const AffineSystem& sys_;
  const CurrentPatterns& patterns_;
};

class ReducedEngine final : public ForwardEngine {
 public:
  ReducedEngine(const ReducedSystem& rsys, const CurrentPatterns& patterns)
      : rsys_(rsys), patterns_(patterns) {}
  ForwardSolution solve(const Eigen::VectorXd& sigma,
                        const Eigen::VectorXd& z) override {
    return solve_reduced(rsys_, sigma, z, patterns_);
  }
  std::string name() const override { return "reduced"; }

 private:
  const ReducedSystem& rsys_;
  const CurrentPatterns& patterns_;
};

/// Diagnostic objective: 1/2 ||P(V-U)||^2 / gamma^2 + alpha * R(sigma).
double objective_eval(const Mesh& mesh, const ProjectionOperator& P,
                      const NoiseModel& noise, const Eigen::VectorXd& V,
                      const Eigen::VectorXd& Uvec, const Eigen::VectorXd& sigma,
                      double alpha, double T);

/// Sequential linearization with one projected lagged-diffusivity step per
/// linearization, solved by priorconditioned LSQR with Morozov stopping:
///   1. Jacobian at the current iterate from the cached forward solution.
///   2. Whitened projected operator and shifted target.
///   3. TV preconditioner at the shifted field, Dirichlet rows on electrodes.
///   4. Inner LSQR, revert the change of variables, clamp at delta.
///   5. Reassemble with electrode-node values included and forward solve.
///   6. Exit once the whitened projected discrepancy reaches epsilon.
/// The contact estimate z0 stays fixed throughout.
ReconstructionResult outer_iterate(const InversionConfig& cfg,
                                   ForwardEngine& engine,
                                   const AffineSystem& sys,
                                   const FreeNodeMap& map,
                                   const ProjectionOperator& P,
                                   const NoiseModel& noise,
                                   const Eigen::VectorXd& V,
                                   const Eigen::VectorXd& sigma0,
                                   const Eigen::VectorXd& z0,
                                   std::ostream* log = nullptr);

/// Divergence guard predicate: true when the tail of the discrepancy history
/// grew `limit` consecutive times.
bool should_abort_divergence(const std::vector<double>& discrepancies,
                             int limit);

}  // namespace eit
