#pragma once

#include <Eigen/Dense>

#include "eit/cem.hpp"
#include "eit/meshgen.hpp"
#include "eit/sensitivity.hpp"

namespace eit::test {

/// Forward closure over (sigma, z) for finite-difference oracles.
ForwardClosure forward_closure(const AffineSystem& sys,
                               const CurrentPatterns& patterns);

/// Test-only explicit construction of the stiffness increment dA_l of one
/// nodal hat function, assembled independently of the production path.
Eigen::MatrixXd explicit_delta_A(const Mesh& mesh, int node);

/// Sixteen side electrodes (two staggered rings of eight) on a unit-ish
/// cylinder of the given radius/height.
std::vector<ElectrodeDescriptor> sixteen_side_electrodes(
    double cyl_radius = 1.0, double height = 1.0,
    double electrode_radius = 0.16);

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want);

}  // namespace eit::test
