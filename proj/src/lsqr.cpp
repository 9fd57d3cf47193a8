#include "eit/lsqr.hpp"

#include <cmath>

#include "eit/common.hpp"

namespace eit {

LsqrResult priorcond_lsqr(const LinearOperator& B, const Eigen::VectorXd& b,
                          const TVPreconditioner& prec,
                          const LsqrOptions& opts) {
  if (B.cols != prec.size())
    throw Error("priorcond_lsqr: operator/preconditioner size mismatch");
  if (!b.allFinite()) throw Error("priorcond_lsqr: non-finite target vector");

  LsqrResult res;
  res.solution = Eigen::VectorXd::Zero(B.cols);

  // The zero iterate already meets the discrepancy level.
  double beta = b.norm();
  if (beta <= opts.epsilon) {
    res.converged = true;
    return res;
  }

  // Golub-Kahan bidiagonalization of B H^{-1/2}, with the right Lanczos
  // vectors substituted by their H^{-1/2}-lifted versions so that only
  // H^{-1} (and H for norms) is ever applied.
  Eigen::VectorXd u = b / beta;
  Eigen::VectorXd g = B.apply_transpose(u);
  if (!g.allFinite()) throw Error("priorcond_lsqr: non-finite operator product");
  Eigen::VectorXd t = prec.apply_inverse(g);
  double alpha = std::sqrt(std::max(0.0, g.dot(t)));
  if (alpha == 0.0) {
    // b is orthogonal to the range of B: no descent direction exists.
    res.residuals.push_back(beta);
    return res;
  }
  Eigen::VectorXd v = t / alpha;  // H^{-1/2}-lifted right vector
  Eigen::VectorXd w = v;
  double phibar = beta;
  double rhobar = alpha;

  for (int k = 0; k < opts.max_iterations; ++k) {
    Eigen::VectorXd unext = B.apply(v) - alpha * u;
    beta = unext.norm();
    if (beta > 0) u = unext / beta;

    g = B.apply_transpose(u);
    t = prec.apply_inverse(g);
    Eigen::VectorXd vhat = t - beta * v;
    alpha = std::sqrt(std::max(0.0, vhat.dot(prec.apply(vhat))));
    if (alpha > 0) v = vhat / alpha;

    const double rho = std::hypot(rhobar, beta);
    const double c = rhobar / rho;
    const double s = beta / rho;
    const double theta = s * alpha;
    rhobar = -c * alpha;
    const double phi = c * phibar;
    phibar = s * phibar;

    res.solution += (phi / rho) * w;
    w = v - (theta / rho) * w;

    ++res.iterations;
    res.residuals.push_back(phibar);
    if (phibar <= opts.epsilon) {
      res.converged = true;
      break;
    }
    if (beta == 0.0 || alpha == 0.0) break;  // Krylov space exhausted
  }
  return res;
}

}  // namespace eit
