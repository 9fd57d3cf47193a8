#include "eit/sensitivity.hpp"

#include <cmath>

#include "eit/common.hpp"

namespace eit {

FreeNodeMap make_free_node_map(const Mesh& mesh,
                               const ElectrodeLayout& layout) {
  FreeNodeMap map;
  const Eigen::Index n = mesh.node_count();
  map.node_to_free = Eigen::VectorXi::Constant(n, -1);
  std::vector<char> on_electrode(static_cast<std::size_t>(n), 0);
  for (int id : layout.electrode_nodes)
    on_electrode[static_cast<std::size_t>(id)] = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (on_electrode[static_cast<std::size_t>(i)]) continue;
    map.node_to_free[i] = static_cast<int>(map.free_nodes.size());
    map.free_nodes.push_back(static_cast<int>(i));
  }
  if (map.free_nodes.empty())
    throw Error("free node map: every node lies on an electrode");
  return map;
}

Eigen::MatrixXd jacobian_sigma(const AffineSystem& sys,
                               const ForwardSolution& sol,
                               const FreeNodeMap& map) {
  const Mesh& mesh = *sys.mesh;
  const int nv = mesh.dim + 1;
  const Eigen::Index L = sol.X.cols();
  const int M = sys.M;
  if (sol.X.rows() != sys.size() || sol.X0.rows() != sys.size() ||
      sol.X0.cols() != M)
    throw Error("jacobian_sigma: solution/system shape mismatch");

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(L * M, map.free_count());
  Eigen::MatrixXd X0e(nv, M), Xe(nv, L);
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    for (int v = 0; v < nv; ++v) {
      const int g = mesh.elements(e, v);
      X0e.row(v) = sol.X0.row(g);
      Xe.row(v) = sol.X.row(g);
    }
    const auto G = mesh.shape_gradients.middleRows(e * nv, nv);  // nv x d
    // dA_l restricted to element e is (vol/(d+1)) G G^T for each vertex l,
    // so one M x L contraction is shared by all d+1 columns it feeds.
    const Eigen::MatrixXd Z = (mesh.element_volumes[e] / nv) *
                              ((G.transpose() * X0e).transpose() *
                               (G.transpose() * Xe));  // M x L
    const auto zvec = Eigen::Map<const Eigen::VectorXd>(Z.data(), Z.size());
    for (int v = 0; v < nv; ++v) {
      const int col = map.node_to_free[mesh.elements(e, v)];
      if (col >= 0) J.col(col) -= zvec;
    }
  }
  return J;
}

Eigen::MatrixXd jacobian_z(const AffineSystem& sys, const ForwardSolution& sol,
                           const Eigen::VectorXd& z) {
  const int M = sys.M;
  const Eigen::Index L = sol.X.cols();
  if (z.size() != M) throw Error("jacobian_z: z length != M");
  if (sol.X.rows() != sys.size())
    throw Error("jacobian_z: solution/system shape mismatch");

  Eigen::MatrixXd J(L * M, M);
  for (int m = 0; m < M; ++m) {
    const Eigen::MatrixXd Z =
        (1.0 / (z[m] * z[m])) *
        (sol.X0.transpose() *
         (sys.contact_blocks[static_cast<std::size_t>(m)] * sol.X));
    J.col(m) = Eigen::Map<const Eigen::VectorXd>(Z.data(), Z.size());
  }
  return J;
}

Eigen::VectorXd fd_check(const ForwardClosure& forward,
                         const Eigen::VectorXd& sigma,
                         const Eigen::VectorXd& z, bool wrt_sigma, int index,
                         double step) {
  if (!(step > 0)) throw Error("fd_check: step must be positive");
  Eigen::VectorXd sp = sigma, sm = sigma, zp = z, zm = z;
  if (wrt_sigma) {
    if (index < 0 || index >= sigma.size()) throw Error("fd_check: bad index");
    sp[index] += step;
    sm[index] -= step;
    if (sm[index] <= 0) throw Error("fd_check: perturbed sigma non-positive");
  } else {
    if (index < 0 || index >= z.size()) throw Error("fd_check: bad index");
    zp[index] += step;
    zm[index] -= step;
    if (zm[index] <= 0) throw Error("fd_check: perturbed z non-positive");
  }
  return (forward(sp, zp) - forward(sm, zm)) / (2.0 * step);
}

}  // namespace eit
