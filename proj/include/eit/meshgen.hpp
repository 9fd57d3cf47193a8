#pragma once

#include "eit/mesh.hpp"

namespace eit {

/// Structured demo/test meshes. Production meshes are expected to come from
/// an external generator in the documented text format; these cover the
/// shapes needed by the bundled examples and the test suite.

/// The reference tetrahedron (0,0,0),(1,0,0),(0,1,0),(0,0,1).
Mesh make_reference_tet();

/// Axis-aligned box [0,sx]x[0,sy]x[0,sz], each grid cell split into 6
/// face-consistent tetrahedra.
Mesh make_cube(int nx, int ny, int nz, double sx = 1.0, double sy = 1.0,
               double sz = 1.0);

/// Cylinder of given radius and height centered on the z-axis with base at
/// z=0. The disk is a spider-web triangulation with nr rings; prisms from nz
/// extrusion layers are split into tetrahedra with face-consistent diagonals.
Mesh make_cylinder(int nr, int nz, double radius = 1.0, double height = 1.0);

/// Rectangle [0,w]x[0,h] on an nx-by-ny grid, each cell split into 4
/// triangles through its center (mirror-symmetric about both midlines).
Mesh make_rect2d(int nx, int ny, double w = 1.0, double h = 1.0);

/// Ring of M disk electrodes of the given radius on the side of a cylinder,
/// centered at height z. Angular positions 2*pi*m/M + phase.
std::vector<ElectrodeDescriptor> cylinder_side_disks(int M, double z,
                                                     double electrode_radius,
                                                     double cyl_radius = 1.0,
                                                     double phase = 0.0);

}  // namespace eit
