#include "eit/meshgen.hpp"

#include <cmath>
#include <vector>

#include "eit/common.hpp"

namespace eit {

Mesh make_reference_tet() {
  Eigen::MatrixXd nodes(4, 3);
  nodes << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  Eigen::MatrixXi elems(1, 4);
  elems << 0, 1, 2, 3;
  return build_mesh(3, nodes, elems);
}

Mesh make_cube(int nx, int ny, int nz, double sx, double sy, double sz) {
  if (nx < 1 || ny < 1 || nz < 1) throw Error("make_cube: grid counts >= 1");
  const int px = nx + 1, py = ny + 1, pz = nz + 1;
  auto id = [&](int i, int j, int k) { return (k * py + j) * px + i; };

  Eigen::MatrixXd nodes(px * py * pz, 3);
  for (int k = 0; k < pz; ++k)
    for (int j = 0; j < py; ++j)
      for (int i = 0; i < px; ++i)
        nodes.row(id(i, j, k)) << sx * i / nx, sy * j / ny, sz * k / nz;

  // Kuhn split: six tetrahedra per cell along vertex paths from (0,0,0) to
  // (1,1,1); identical in every cell, hence face-consistent.
  static const int paths[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  Eigen::MatrixXi elems(6 * nx * ny * nz, 4);
  Eigen::Index e = 0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& p : paths) {
          int c[3] = {i, j, k};
          elems(e, 0) = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            c[p[s]] += 1;
            elems(e, s + 1) = id(c[0], c[1], c[2]);
          }
          ++e;
        }
  return build_mesh(3, nodes, elems);
}

namespace {

// Spider-web disk: center node plus rings of 6*i nodes. Returns points and
// triangles with ascending-sorted vertex triples.
void spider_disk(int nr, double radius, Eigen::MatrixXd& pts,
                 Eigen::MatrixXi& tris) {
  const int P = 1 + 3 * nr * (nr + 1);
  pts.resize(P, 2);
  pts.row(0) << 0.0, 0.0;
  auto ring_start = [](int i) { return 1 + 3 * i * (i - 1); };
  for (int i = 1; i <= nr; ++i) {
    const double r = radius * i / nr;
    for (int j = 0; j < 6 * i; ++j) {
      const double a = 2.0 * M_PI * j / (6 * i);
      pts.row(ring_start(i) + j) << r * std::cos(a), r * std::sin(a);
    }
  }

  std::vector<std::array<int, 3>> t;
  // Innermost ring fans from the center.
  for (int j = 0; j < 6; ++j)
    t.push_back({0, ring_start(1) + j, ring_start(1) + (j + 1) % 6});
  // Annulus between ring i-1 and ring i, sector by sector.
  for (int i = 2; i <= nr; ++i) {
    const int nin = 6 * (i - 1), nout = 6 * i;
    for (int s = 0; s < 6; ++s) {
      auto inner = [&](int k) { return ring_start(i - 1) + (s * (i - 1) + k) % nin; };
      auto outer = [&](int k) { return ring_start(i) + (s * i + k) % nout; };
      for (int k = 0; k < i; ++k)
        t.push_back({outer(k), outer(k + 1), inner(k)});
      for (int k = 0; k + 1 < i; ++k)
        t.push_back({inner(k), outer(k + 1), inner(k + 1)});
    }
  }
  tris.resize(static_cast<Eigen::Index>(t.size()), 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::sort(t[i].begin(), t[i].end());
    tris.row(static_cast<Eigen::Index>(i)) << t[i][0], t[i][1], t[i][2];
  }
}

}  // namespace

Mesh make_cylinder(int nr, int nz, double radius, double height) {
  if (nr < 1 || nz < 1) throw Error("make_cylinder: nr, nz >= 1");
  Eigen::MatrixXd disk_pts;
  Eigen::MatrixXi disk_tris;
  spider_disk(nr, radius, disk_pts, disk_tris);
  const Eigen::Index P = disk_pts.rows();

  Eigen::MatrixXd nodes(P * (nz + 1), 3);
  for (int t = 0; t <= nz; ++t)
    for (Eigen::Index p = 0; p < P; ++p)
      nodes.row(t * P + p) << disk_pts(p, 0), disk_pts(p, 1),
          height * t / nz;

  // Each prism over a disk triangle (a<b<c) splits into three tetrahedra
  // whose quad-face diagonals run bottom-min to top-max; the rule depends
  // only on the shared edge, so neighboring prisms agree.
  Eigen::MatrixXi elems(3 * disk_tris.rows() * nz, 4);
  Eigen::Index e = 0;
  for (int t = 0; t < nz; ++t) {
    const Eigen::Index lo = t * P, hi = (t + 1) * P;
    for (Eigen::Index s = 0; s < disk_tris.rows(); ++s) {
      const Eigen::Index a = disk_tris(s, 0), b = disk_tris(s, 1),
                         c = disk_tris(s, 2);
      elems.row(e++) << lo + a, lo + b, lo + c, hi + c;
      elems.row(e++) << lo + a, lo + b, hi + c, hi + b;
      elems.row(e++) << lo + a, hi + b, hi + c, hi + a;
    }
  }
  return build_mesh(3, nodes, elems);
}

Mesh make_rect2d(int nx, int ny, double w, double h) {
  if (nx < 1 || ny < 1) throw Error("make_rect2d: grid counts >= 1");
  const int px = nx + 1, py = ny + 1;
  auto gid = [&](int i, int j) { return j * px + i; };
  const int ncorner = px * py;

  Eigen::MatrixXd nodes(ncorner + nx * ny, 2);
  for (int j = 0; j < py; ++j)
    for (int i = 0; i < px; ++i) nodes.row(gid(i, j)) << w * i / nx, h * j / ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      nodes.row(ncorner + j * nx + i) << w * (i + 0.5) / nx, h * (j + 0.5) / ny;

  Eigen::MatrixXi elems(4 * nx * ny, 3);
  Eigen::Index e = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int m = ncorner + j * nx + i;
      const int c00 = gid(i, j), c10 = gid(i + 1, j), c11 = gid(i + 1, j + 1),
                c01 = gid(i, j + 1);
      elems.row(e++) << c00, c10, m;
      elems.row(e++) << c10, c11, m;
      elems.row(e++) << c11, c01, m;
      elems.row(e++) << c01, c00, m;
    }
  return build_mesh(2, nodes, elems);
}

std::vector<ElectrodeDescriptor> cylinder_side_disks(int M, double z,
                                                     double electrode_radius,
                                                     double cyl_radius,
                                                     double phase) {
  std::vector<ElectrodeDescriptor> spec;
  spec.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const double a = 2.0 * M_PI * m / M + phase;
    ElectrodeDescriptor d;
    d.kind = ElectrodeDescriptor::Kind::Disk;
    d.center = Eigen::Vector3d(cyl_radius * std::cos(a),
                               cyl_radius * std::sin(a), z);
    d.radius = electrode_radius;
    // Restrict to side facets so rim-adjacent cap facets are never claimed.
    d.normal = Eigen::Vector3d(std::cos(a), std::sin(a), 0.0);
    d.normal_min_dot = 0.5;
    spec.push_back(std::move(d));
  }
  return spec;
}

}  // namespace eit
