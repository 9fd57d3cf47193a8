#include "eit/inversion.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include "eit/common.hpp"
#include "eit/lsqr.hpp"
#include "eit/tv.hpp"

namespace eit {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

double objective_eval(const Mesh& mesh, const ProjectionOperator& P,
                      const NoiseModel& noise, const Eigen::VectorXd& V,
                      const Eigen::VectorXd& Uvec, const Eigen::VectorXd& sigma,
                      double alpha, double T) {
  const Eigen::VectorXd r = P.apply(V - Uvec);
  const double fit = 0.5 * r.squaredNorm() / (noise.gamma * noise.gamma);
  return alpha == 0.0 ? fit : fit + alpha * tv_value(mesh, sigma, T);
}

bool should_abort_divergence(const std::vector<double>& discrepancies,
                             int limit) {
  if (static_cast<int>(discrepancies.size()) < limit + 1) return false;
  const std::size_t last = discrepancies.size() - 1;
  for (int i = 0; i < limit; ++i)
    if (discrepancies[last - i] <= discrepancies[last - i - 1]) return false;
  return true;
}

ReconstructionResult outer_iterate(const InversionConfig& cfg,
                                   ForwardEngine& engine,
                                   const AffineSystem& sys,
                                   const FreeNodeMap& map,
                                   const ProjectionOperator& P,
                                   const NoiseModel& noise,
                                   const Eigen::VectorXd& V,
                                   const Eigen::VectorXd& sigma0,
                                   const Eigen::VectorXd& z0,
                                   std::ostream* log) {
  const Mesh& mesh = *sys.mesh;
  const Eigen::Index n = mesh.node_count();
  if (sigma0.size() != n) throw Error("outer_iterate: sigma0 length != n");
  if ((sigma0.array() < cfg.delta).any())
    throw Error("outer_iterate: sigma0 below the clamping level delta");
  if (V.size() != P.dimension())
    throw Error("outer_iterate: data length != projector dimension");
  if (!(noise.gamma > 0)) throw Error("outer_iterate: gamma must be positive");

  const double eps = noise.epsilon();
  const double gamma = noise.gamma;
  const Eigen::Index nf = map.free_count();

  ReconstructionResult res;
  res.engine = engine.name();
  res.epsilon = eps;

  Eigen::VectorXd sigma = sigma0;
  ForwardSolution fs = engine.solve(sigma, z0);
  res.initial_discrepancy = P.apply_whitened(V - fs.Uvec, gamma).norm();
  res.final_discrepancy = res.initial_discrepancy;

  std::vector<double> dhist{res.initial_discrepancy};
  for (int i = 0; i < cfg.max_outer; ++i) {
    const auto t_start = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iteration = i + 1;

    // (1) Jacobian at (sigma^(i), z0) from the cached solves.
    auto t0 = std::chrono::steady_clock::now();
    const Eigen::MatrixXd J = jacobian_sigma(sys, fs, map);
    rec.jacobian_seconds = seconds_since(t0);

    // (2) Whitened operator, shifted linearization target.
    Eigen::VectorXd sigma_tilde(nf);
    for (Eigen::Index j = 0; j < nf; ++j) {
      const int node = map.free_nodes[static_cast<std::size_t>(j)];
      sigma_tilde[j] = sigma[node] - sigma0[node];
    }
    const Eigen::VectorXd y_tilde = V - fs.Uvec + J * sigma_tilde;
    const Eigen::VectorXd b_tilde = P.apply_whitened(y_tilde, gamma);

    // (3) Lagged-diffusivity preconditioner at the shifted field, with the
    // homogeneous Dirichlet condition on the electrode nodes.
    t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd shifted = sigma - sigma0;
    TVConfig tvcfg;
    tvcfg.T = cfg.T;
    tvcfg.dirichlet_nodes = sys.layout.electrode_nodes;
    TVPreconditioner prec(mesh, shifted, tvcfg);

    // (4) Inner priorconditioned LSQR with the Morozov level.
    LinearOperator B;
    B.rows = V.size();
    B.cols = nf;
    B.apply = [&](const Eigen::VectorXd& v) {
      return P.apply_whitened(J * v, gamma);
    };
    B.apply_transpose = [&](const Eigen::VectorXd& u) {
      return Eigen::VectorXd(J.transpose() * P.apply_whitened(u, gamma));
    };
    const LsqrResult inner =
        priorcond_lsqr(B, b_tilde, prec, LsqrOptions{eps, cfg.max_inner});
    rec.inner_seconds = seconds_since(t0);
    rec.inner_iterations = inner.iterations;
    rec.inner_converged = inner.converged;

    // Revert the change of variables and clamp.
    sigma = sigma0;
    for (Eigen::Index j = 0; j < nf; ++j)
      sigma[map.free_nodes[static_cast<std::size_t>(j)]] += inner.solution[j];
    sigma = sigma.cwiseMax(cfg.delta);

    // (5)-(6) Reassemble the sigma-dependent part (electrode nodes included)
    // and forward solve.
    t0 = std::chrono::steady_clock::now();
    fs = engine.solve(sigma, z0);
    rec.forward_seconds = seconds_since(t0);

    const double d = P.apply_whitened(V - fs.Uvec, gamma).norm();
    rec.discrepancy = d;
    rec.objective = objective_eval(mesh, P, noise, V, fs.Uvec, sigma,
                                   cfg.alpha_diagnostic, cfg.T);
    rec.total_seconds = seconds_since(t_start);
    res.history.push_back(rec);
    res.outer_iterations = i + 1;
    res.final_discrepancy = d;

    if (log) {
      char line[256];
      std::snprintf(line, sizeof(line),
                    "{\"iter\":%d,\"inner\":%d,\"discrepancy\":%.12g,"
                    "\"phi_p\":%.12g,\"wall_s\":%.6g}",
                    rec.iteration, rec.inner_iterations, rec.discrepancy,
                    rec.objective, rec.total_seconds);
      *log << line << '\n';
    }

    // (7) Morozov exit.
    if (d <= eps) {
      res.converged = true;
      break;
    }
    dhist.push_back(d);
    if (should_abort_divergence(dhist, cfg.divergence_limit)) {
      res.aborted_divergence = true;
      break;
    }
  }

  res.sigma = sigma;
  return res;
}

}  // namespace eit
