#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "eit/cem.hpp"

namespace eit {

/// Mapping between mesh nodes and the conductivity unknowns. Nodes on the
/// electrodes are excluded from the unknown vector; they stay pinned to the
/// background value throughout the inversion.
struct FreeNodeMap {
  std::vector<int> free_nodes;   // size n', ascending node ids
  Eigen::VectorXi node_to_free;  // length n, -1 on electrode nodes

  Eigen::Index free_count() const {
    return static_cast<Eigen::Index>(free_nodes.size());
  }
};

FreeNodeMap make_free_node_map(const Mesh& mesh, const ElectrodeLayout& layout);

/// Jacobian of the vectorized electrode voltages with respect to the free
/// nodal conductivities: column for node l is vec(-X0^T dA_l X). Size LM x n'.
Eigen::MatrixXd jacobian_sigma(const AffineSystem& sys,
                               const ForwardSolution& sol,
                               const FreeNodeMap& map);

/// Jacobian with respect to contact resistances: column m is
/// vec((1/z_m^2) X0^T B_m X). Size LM x M.
Eigen::MatrixXd jacobian_z(const AffineSystem& sys, const ForwardSolution& sol,
                           const Eigen::VectorXd& z);

/// Re-solvable forward closure: (sigma, z) -> vectorized voltages.
using ForwardClosure =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// Central finite-difference approximation of one Jacobian column, the
/// independent oracle for jacobian_sigma / jacobian_z. `wrt_sigma` selects
/// the differentiation variable; `index` the coordinate.
Eigen::VectorXd fd_check(const ForwardClosure& forward,
                         const Eigen::VectorXd& sigma,
                         const Eigen::VectorXd& z, bool wrt_sigma, int index,
                         double step);

}  // namespace eit
