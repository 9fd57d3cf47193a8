#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace eit {

/// Simplicial mesh (triangles for d=2, tetrahedra for d=3) with precomputed
/// element geometry and an explicit boundary facet list.
///
/// Immutable after construction; safe to share read-only across threads.
struct Mesh {
  int dim = 3;
  Eigen::MatrixXd nodes;            // N x dim
  Eigen::MatrixXi elements;         // E x (dim+1), canonically oriented
  Eigen::MatrixXi boundary_facets;  // F x dim
  Eigen::VectorXi facet_owner;      // F, owning element of each boundary facet

  Eigen::VectorXd element_volumes;  // E, strictly positive
  // Row e*(dim+1)+v holds the constant gradient of the nodal hat function of
  // local vertex v on element e.
  Eigen::MatrixXd shape_gradients;  // (E*(dim+1)) x dim

  Eigen::VectorXd facet_areas;      // F
  Eigen::MatrixXd facet_centroids;  // F x dim
  Eigen::MatrixXd facet_normals;    // F x dim, unit outward

  std::uint64_t content_id = 0;     // hash of nodes+elements, provenance tag

  Eigen::Index node_count() const { return nodes.rows(); }
  Eigen::Index element_count() const { return elements.rows(); }
  Eigen::Index facet_count() const { return boundary_facets.rows(); }

  double total_volume() const { return element_volumes.sum(); }
  double boundary_area() const { return facet_areas.sum(); }
};

/// Validates connectivity, orients elements, derives boundary facets when
/// none are given, and fills all geometric caches. Throws eit::Error on
/// inverted/degenerate elements, dangling nodes, non-manifold boundary,
/// a disconnected mesh, or a boundary list inconsistent with the elements.
Mesh build_mesh(int dim, Eigen::MatrixXd nodes, Eigen::MatrixXi elements,
                Eigen::MatrixXi boundary_facets = Eigen::MatrixXi());

/// Reads the plain-text format documented in the README:
///   dim N n_elem n_bfacet
///   N coordinate lines, n_elem element lines, n_bfacet facet lines.
/// Lines starting with '#' and blank lines are skipped.
Mesh load_mesh(const std::string& path);

void save_mesh(const Mesh& mesh, const std::string& path);

/// Geometric predicate describing one electrode on the boundary.
struct ElectrodeDescriptor {
  enum class Kind { Disk, Rect };
  Kind kind = Kind::Disk;
  Eigen::VectorXd center;  // dim
  double radius = 0.0;     // Disk: Euclidean ball around center

  // Rect: |(x-c)*axis_u| <= half_u and |(x-c)*axis_v| <= half_v
  Eigen::VectorXd axis_u, axis_v;
  double half_u = 0.0, half_v = 0.0;

  // Optional orientation filter: facet accepted only when its outward normal
  // has dot product >= normal_min_dot with this direction. Empty = no filter.
  Eigen::VectorXd normal;
  double normal_min_dot = 0.25;

  bool matches(const Eigen::VectorXd& centroid,
               const Eigen::VectorXd& facet_normal) const;
};

struct ElectrodeLayout {
  int M = 0;
  std::vector<std::vector<int>> facets;  // M disjoint, nonempty facet lists
  Eigen::VectorXd areas;                 // M
  std::vector<int> electrode_nodes;      // sorted union of facet node ids
};

/// Assigns boundary facets to electrodes by centroid membership. Throws on
/// empty electrodes, overlapping descriptors, or an electrode whose facet set
/// is not edge-connected.
ElectrodeLayout assign_electrodes(const Mesh& mesh,
                                  const std::vector<ElectrodeDescriptor>& spec);

}  // namespace eit
