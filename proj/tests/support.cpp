#include "support.hpp"

namespace eit::test {

ForwardClosure forward_closure(const AffineSystem& sys,
                               const CurrentPatterns& patterns) {
  return [&sys, &patterns](const Eigen::VectorXd& sigma,
                           const Eigen::VectorXd& z) {
    return solve_forward(sys, sigma, z, patterns).Uvec;
  };
}

Eigen::MatrixXd explicit_delta_A(const Mesh& mesh, int node) {
  const int nv = mesh.dim + 1;
  Eigen::MatrixXd dA =
      Eigen::MatrixXd::Zero(mesh.node_count(), mesh.node_count());
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    bool contains = false;
    for (int v = 0; v < nv; ++v)
      if (mesh.elements(e, v) == node) contains = true;
    if (!contains) continue;
    // integral of the hat function over the element is vol/(d+1)
    const auto G = mesh.shape_gradients.middleRows(e * nv, nv);
    const Eigen::MatrixXd S =
        (mesh.element_volumes[e] / nv) * (G * G.transpose());
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        dA(mesh.elements(e, i), mesh.elements(e, j)) += S(i, j);
  }
  return dA;
}

std::vector<ElectrodeDescriptor> sixteen_side_electrodes(
    double cyl_radius, double height, double electrode_radius) {
  auto lower = cylinder_side_disks(8, 0.3 * height, electrode_radius,
                                   cyl_radius, 0.0);
  auto upper = cylinder_side_disks(8, 0.7 * height, electrode_radius,
                                   cyl_radius, M_PI / 8.0);
  lower.insert(lower.end(), upper.begin(), upper.end());
  return lower;
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / want.norm();
}

}  // namespace eit::test
