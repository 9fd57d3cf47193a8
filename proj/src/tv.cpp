#include "eit/tv.hpp"

#include <algorithm>
#include <cmath>

#include "eit/common.hpp"

namespace eit {

namespace {

// Element gradient via vertex differences: algebraically equal to
// sum_v sigma_v grad(phi_v) because the shape gradients sum to zero, and
// exactly invariant under constant shifts of sigma.
Eigen::VectorXd element_gradient(const Mesh& mesh, const Eigen::VectorXd& sigma,
                                 Eigen::Index e) {
  const int nv = mesh.dim + 1;
  const double s0 = sigma[mesh.elements(e, 0)];
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(mesh.dim);
  for (int v = 1; v < nv; ++v)
    grad += (sigma[mesh.elements(e, v)] - s0) *
            mesh.shape_gradients.row(e * nv + v).transpose();
  return grad;
}

}  // namespace

double tv_value(const Mesh& mesh, const Eigen::VectorXd& sigma, double T) {
  if (!(T > 0)) throw Error("tv_value: T must be positive");
  if (sigma.size() != mesh.node_count())
    throw Error("tv_value: sigma length != node count");
  double r = 0.0;
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    const Eigen::VectorXd grad = element_gradient(mesh, sigma, e);
    r += mesh.element_volumes[e] * std::sqrt(T * T + grad.squaredNorm());
  }
  return r;
}

TVPreconditioner::TVPreconditioner(const Mesh& mesh,
                                   const Eigen::VectorXd& sigma,
                                   const TVConfig& cfg) {
  if (!(cfg.T > 0)) throw Error("assemble_H: T must be positive");
  if (cfg.dirichlet_nodes.empty())
    throw Error("assemble_H: Dirichlet node set must be nonempty");
  if (sigma.size() != mesh.node_count())
    throw Error("assemble_H: sigma length != node count");

  const Eigen::Index n = mesh.node_count();
  dirichlet_nodes_ = cfg.dirichlet_nodes;
  std::sort(dirichlet_nodes_.begin(), dirichlet_nodes_.end());
  dirichlet_nodes_.erase(
      std::unique(dirichlet_nodes_.begin(), dirichlet_nodes_.end()),
      dirichlet_nodes_.end());

  Eigen::VectorXi node_to_free = Eigen::VectorXi::Constant(n, -1);
  Eigen::VectorXi node_to_dir = Eigen::VectorXi::Constant(n, -1);
  {
    std::vector<char> is_dir(static_cast<std::size_t>(n), 0);
    for (int id : dirichlet_nodes_) {
      if (id < 0 || id >= n) throw Error("assemble_H: Dirichlet node out of range");
      is_dir[static_cast<std::size_t>(id)] = 1;
    }
    int fc = 0, dc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (is_dir[static_cast<std::size_t>(i)]) {
        node_to_dir[i] = dc++;
      } else {
        node_to_free[i] = fc++;
        free_nodes_.push_back(static_cast<int>(i));
      }
    }
  }
  const Eigen::Index nf = static_cast<Eigen::Index>(free_nodes_.size());
  const Eigen::Index nd = static_cast<Eigen::Index>(dirichlet_nodes_.size());
  if (nf == 0) throw Error("assemble_H: no free nodes left");

  const int nv = mesh.dim + 1;
  coeffs_.resize(mesh.element_count());
  std::vector<Eigen::Triplet<double>> ht, ct;
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    const auto G = mesh.shape_gradients.middleRows(e * nv, nv);
    const Eigen::VectorXd grad = element_gradient(mesh, sigma, e);
    const double c = 1.0 / std::sqrt(cfg.T * cfg.T + grad.squaredNorm());
    coeffs_[e] = c;
    const double scale = c * mesh.element_volumes[e];
    for (int i = 0; i < nv; ++i) {
      const int gi = mesh.elements(e, i);
      const int fi = node_to_free[gi];
      if (fi < 0) continue;
      for (int j = 0; j < nv; ++j) {
        const int gj = mesh.elements(e, j);
        const double v = scale * G.row(i).dot(G.row(j));
        if (node_to_free[gj] >= 0)
          ht.emplace_back(fi, node_to_free[gj], v);
        else
          ct.emplace_back(fi, node_to_dir[gj], v);
      }
    }
  }
  H_.resize(nf, nf);
  H_.setFromTriplets(ht.begin(), ht.end());
  H_.makeCompressed();
  coupling_.resize(nf, nd);
  coupling_.setFromTriplets(ct.begin(), ct.end());
  coupling_.makeCompressed();

  llt_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
  llt_->compute(H_);
  if (llt_->info() != Eigen::Success)
    throw Error("assemble_H: factorization failed");
}

Eigen::VectorXd TVPreconditioner::apply_inverse(const Eigen::VectorXd& v) const {
  if (v.size() != H_.rows()) throw Error("apply_inverse: size mismatch");
  return llt_->solve(v);
}

Eigen::VectorXd TVPreconditioner::gradient_of_tv(
    const Eigen::VectorXd& sigma_full) const {
  Eigen::VectorXd sf(H_.rows()), sd(coupling_.cols());
  for (Eigen::Index i = 0; i < H_.rows(); ++i)
    sf[i] = sigma_full[free_nodes_[static_cast<std::size_t>(i)]];
  for (Eigen::Index i = 0; i < coupling_.cols(); ++i)
    sd[i] = sigma_full[dirichlet_nodes_[static_cast<std::size_t>(i)]];
  return H_ * sf + coupling_ * sd;
}

}  // namespace eit
