#include "eit/mesh.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "eit/common.hpp"

namespace eit {

std::string hex_id(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

namespace {

using FacetKey = std::array<int, 3>;  // sorted node ids, unused slots = -1

FacetKey facet_key(const int* nodes, int d) {
  FacetKey k{-1, -1, -1};
  for (int i = 0; i < d; ++i) k[i] = nodes[i];
  std::sort(k.begin(), k.begin() + d);
  return k;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

double signed_volume(const Eigen::MatrixXd& nodes, const Eigen::MatrixXi& elems,
                     Eigen::Index e, int d) {
  Eigen::MatrixXd D(d, d);
  for (int i = 0; i < d; ++i)
    D.col(i) = (nodes.row(elems(e, i + 1)) - nodes.row(elems(e, 0))).transpose();
  double fact = (d == 2) ? 2.0 : 6.0;
  return D.determinant() / fact;
}

std::uint64_t hash_mesh(const Eigen::MatrixXd& nodes,
                        const Eigen::MatrixXi& elems) {
  std::uint64_t h = fnv1a(nodes.data(), sizeof(double) * nodes.size());
  return fnv1a(elems.data(), sizeof(int) * elems.size(), h);
}

}  // namespace

Mesh build_mesh(int dim, Eigen::MatrixXd nodes, Eigen::MatrixXi elements,
                Eigen::MatrixXi boundary_facets) {
  if (dim != 2 && dim != 3) throw Error("mesh: dim must be 2 or 3");
  if (nodes.cols() != dim) throw Error("mesh: node coordinate count != dim");
  if (elements.cols() != dim + 1)
    throw Error("mesh: element vertex count != dim+1");

  const Eigen::Index N = nodes.rows();
  const Eigen::Index E = elements.rows();
  if (N == 0 || E == 0) throw Error("mesh: empty node or element list");

  // Index range and dangling-node checks.
  std::vector<char> touched(static_cast<std::size_t>(N), 0);
  for (Eigen::Index e = 0; e < E; ++e)
    for (int v = 0; v <= dim; ++v) {
      int id = elements(e, v);
      if (id < 0 || id >= N)
        throw Error("mesh: element " + std::to_string(e) +
                    " references out-of-range node " + std::to_string(id));
      touched[static_cast<std::size_t>(id)] = 1;
    }
  for (Eigen::Index i = 0; i < N; ++i)
    if (!touched[static_cast<std::size_t>(i)])
      throw Error("mesh: dangling node " + std::to_string(i));

  // Canonical orientation: swap two vertices when the signed volume is
  // negative, then reject degenerate elements.
  Eigen::VectorXd vols(E);
  for (Eigen::Index e = 0; e < E; ++e) {
    double v = signed_volume(nodes, elements, e, dim);
    if (v < 0) {
      std::swap(elements(e, 1), elements(e, 2));
      v = -v;
    }
    vols[e] = v;
  }
  const double mean_vol = vols.mean();
  for (Eigen::Index e = 0; e < E; ++e)
    if (vols[e] < 1e-14 * mean_vol)
      throw Error("mesh: degenerate element " + std::to_string(e));

  // Face incidence: each facet of each element, counted over the mesh.
  std::map<FacetKey, std::array<Eigen::Index, 2>> faces;  // key -> owners
  for (Eigen::Index e = 0; e < E; ++e) {
    for (int skip = 0; skip <= dim; ++skip) {
      int f[3];
      int c = 0;
      for (int v = 0; v <= dim; ++v)
        if (v != skip) f[c++] = elements(e, v);
      FacetKey key = facet_key(f, dim);
      auto it = faces.find(key);
      if (it == faces.end()) {
        faces[key] = {e, -1};
      } else if (it->second[1] == -1) {
        it->second[1] = e;
      } else {
        throw Error("mesh: non-manifold face shared by >2 elements");
      }
    }
  }

  // Connectivity through shared faces.
  UnionFind uf(static_cast<int>(E));
  for (const auto& [key, owners] : faces)
    if (owners[1] != -1)
      uf.unite(static_cast<int>(owners[0]), static_cast<int>(owners[1]));
  const int root = uf.find(0);
  for (Eigen::Index e = 1; e < E; ++e)
    if (uf.find(static_cast<int>(e)) != root)
      throw Error("mesh: disconnected element set");

  // Boundary facets: faces with exactly one owner. When a list is supplied it
  // must match the derived set exactly.
  std::map<FacetKey, Eigen::Index> derived;
  for (const auto& [key, owners] : faces)
    if (owners[1] == -1) derived[key] = owners[0];

  Eigen::MatrixXi facets;
  Eigen::VectorXi owner;
  if (boundary_facets.size() == 0) {
    facets.resize(static_cast<Eigen::Index>(derived.size()), dim);
    owner.resize(static_cast<Eigen::Index>(derived.size()));
    Eigen::Index i = 0;
    for (const auto& [key, own] : derived) {
      for (int c = 0; c < dim; ++c) facets(i, c) = key[static_cast<std::size_t>(c)];
      owner[i] = static_cast<int>(own);
      ++i;
    }
  } else {
    if (boundary_facets.cols() != dim)
      throw Error("mesh: boundary facet vertex count != dim");
    if (boundary_facets.rows() != static_cast<Eigen::Index>(derived.size()))
      throw Error("mesh: boundary facet list does not match element boundary (" +
                  std::to_string(boundary_facets.rows()) + " listed, " +
                  std::to_string(derived.size()) + " derived)");
    facets = boundary_facets;
    owner.resize(facets.rows());
    for (Eigen::Index i = 0; i < facets.rows(); ++i) {
      int f[3];
      for (int c = 0; c < dim; ++c) {
        f[c] = facets(i, c);
        if (f[c] < 0 || f[c] >= N)
          throw Error("mesh: boundary facet references out-of-range node");
      }
      auto it = derived.find(facet_key(f, dim));
      if (it == derived.end())
        throw Error("mesh: listed boundary facet is not a boundary face");
      owner[i] = static_cast<int>(it->second);
    }
  }

  Mesh m;
  m.dim = dim;
  m.nodes = std::move(nodes);
  m.elements = std::move(elements);
  m.boundary_facets = std::move(facets);
  m.facet_owner = std::move(owner);
  m.element_volumes = std::move(vols);

  // Shape gradients: rows of D^{-1} give the gradients of the barycentric
  // coordinates of vertices 1..d; vertex 0 closes the partition of unity.
  m.shape_gradients.resize(E * (dim + 1), dim);
  for (Eigen::Index e = 0; e < E; ++e) {
    Eigen::MatrixXd D(dim, dim);
    for (int i = 0; i < dim; ++i)
      D.col(i) = (m.nodes.row(m.elements(e, i + 1)) -
                  m.nodes.row(m.elements(e, 0)))
                     .transpose();
    Eigen::MatrixXd Dinv = D.inverse();
    Eigen::RowVectorXd g0 = Eigen::RowVectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) {
      m.shape_gradients.row(e * (dim + 1) + i + 1) = Dinv.row(i);
      g0 -= Dinv.row(i);
    }
    m.shape_gradients.row(e * (dim + 1)) = g0;
  }

  // Facet geometry.
  const Eigen::Index F = m.boundary_facets.rows();
  m.facet_areas.resize(F);
  m.facet_centroids.resize(F, dim);
  m.facet_normals.resize(F, dim);
  for (Eigen::Index f = 0; f < F; ++f) {
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int c = 0; c < dim; ++c)
      centroid += m.nodes.row(m.boundary_facets(f, c)).transpose();
    centroid /= dim;
    m.facet_centroids.row(f) = centroid.transpose();

    Eigen::VectorXd n(dim);
    if (dim == 3) {
      Eigen::Vector3d a = m.nodes.row(m.boundary_facets(f, 0));
      Eigen::Vector3d b = m.nodes.row(m.boundary_facets(f, 1));
      Eigen::Vector3d c = m.nodes.row(m.boundary_facets(f, 2));
      Eigen::Vector3d cr = (b - a).cross(c - a);
      m.facet_areas[f] = 0.5 * cr.norm();
      n = cr.normalized();
    } else {
      Eigen::Vector2d a = m.nodes.row(m.boundary_facets(f, 0));
      Eigen::Vector2d b = m.nodes.row(m.boundary_facets(f, 1));
      Eigen::Vector2d t = b - a;
      m.facet_areas[f] = t.norm();
      n = Eigen::Vector2d(t.y(), -t.x()).normalized();
    }
    // Orient outward: away from the owning element's opposite vertex.
    const Eigen::Index e = m.facet_owner[f];
    Eigen::VectorXd inside = Eigen::VectorXd::Zero(dim);
    for (int v = 0; v <= dim; ++v)
      inside += m.nodes.row(m.elements(e, v)).transpose();
    inside /= dim + 1;
    if (n.dot(centroid - inside) < 0) n = -n;
    m.facet_normals.row(f) = n.transpose();
  }

  m.content_id = hash_mesh(m.nodes, m.elements);
  return m;
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("mesh: cannot open '" + path + "'");

  auto next_line = [&in, &path](std::istringstream& ss) {
    std::string line;
    while (std::getline(in, line)) {
      auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      ss = std::istringstream(line);
      return;
    }
    throw Error("mesh: unexpected end of file in '" + path + "'");
  };

  std::istringstream ss;
  next_line(ss);
  int dim = 0;
  Eigen::Index N = 0, E = 0, F = 0;
  if (!(ss >> dim >> N >> E >> F))
    throw Error("mesh: malformed header in '" + path + "'");
  if (dim != 2 && dim != 3) throw Error("mesh: dim must be 2 or 3");
  if (N <= 0 || E <= 0 || F < 0) throw Error("mesh: bad counts in header");

  Eigen::MatrixXd nodes(N, dim);
  for (Eigen::Index i = 0; i < N; ++i) {
    next_line(ss);
    for (int c = 0; c < dim; ++c)
      if (!(ss >> nodes(i, c)))
        throw Error("mesh: malformed coordinate line " + std::to_string(i));
  }
  Eigen::MatrixXi elements(E, dim + 1);
  for (Eigen::Index e = 0; e < E; ++e) {
    next_line(ss);
    for (int c = 0; c <= dim; ++c)
      if (!(ss >> elements(e, c)))
        throw Error("mesh: malformed element line " + std::to_string(e));
  }
  Eigen::MatrixXi facets(F, dim);
  for (Eigen::Index f = 0; f < F; ++f) {
    next_line(ss);
    for (int c = 0; c < dim; ++c)
      if (!(ss >> facets(f, c)))
        throw Error("mesh: malformed facet line " + std::to_string(f));
  }
  return build_mesh(dim, std::move(nodes), std::move(elements),
                    std::move(facets));
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("mesh: cannot write '" + path + "'");
  out << mesh.dim << ' ' << mesh.node_count() << ' ' << mesh.element_count()
      << ' ' << mesh.facet_count() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i) {
    for (int c = 0; c < mesh.dim; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", mesh.nodes(i, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    for (int c = 0; c <= mesh.dim; ++c)
      out << (c ? " " : "") << mesh.elements(e, c);
    out << '\n';
  }
  for (Eigen::Index f = 0; f < mesh.facet_count(); ++f) {
    for (int c = 0; c < mesh.dim; ++c)
      out << (c ? " " : "") << mesh.boundary_facets(f, c);
    out << '\n';
  }
}

bool ElectrodeDescriptor::matches(const Eigen::VectorXd& centroid,
                                  const Eigen::VectorXd& facet_normal) const {
  if (normal.size() > 0 &&
      facet_normal.dot(normal.normalized()) < normal_min_dot)
    return false;
  if (kind == Kind::Disk) return (centroid - center).norm() <= radius;
  const Eigen::VectorXd rel = centroid - center;
  if (std::abs(rel.dot(axis_u.normalized())) > half_u) return false;
  if (axis_v.size() > 0 && std::abs(rel.dot(axis_v.normalized())) > half_v)
    return false;
  return true;
}

ElectrodeLayout assign_electrodes(const Mesh& mesh,
                                  const std::vector<ElectrodeDescriptor>& spec) {
  const int M = static_cast<int>(spec.size());
  if (M < 2) throw Error("electrodes: at least 2 electrodes required");

  ElectrodeLayout layout;
  layout.M = M;
  layout.facets.resize(static_cast<std::size_t>(M));
  layout.areas = Eigen::VectorXd::Zero(M);

  for (Eigen::Index f = 0; f < mesh.facet_count(); ++f) {
    const Eigen::VectorXd centroid = mesh.facet_centroids.row(f).transpose();
    const Eigen::VectorXd n = mesh.facet_normals.row(f).transpose();
    int match = -1;
    for (int m = 0; m < M; ++m) {
      if (!spec[static_cast<std::size_t>(m)].matches(centroid, n)) continue;
      if (match >= 0)
        throw Error("electrodes: descriptors " + std::to_string(match) +
                    " and " + std::to_string(m) + " overlap on facet " +
                    std::to_string(f));
      match = m;
    }
    if (match >= 0) {
      layout.facets[static_cast<std::size_t>(match)].push_back(
          static_cast<int>(f));
      layout.areas[match] += mesh.facet_areas[f];
    }
  }

  for (int m = 0; m < M; ++m) {
    const auto& fl = layout.facets[static_cast<std::size_t>(m)];
    if (fl.empty())
      throw Error("electrodes: electrode " + std::to_string(m) +
                  " matched no boundary facet");
    // Edge-connectivity within the electrode (shared (d-1)-subsimplices).
    UnionFind uf(static_cast<int>(fl.size()));
    std::map<std::array<int, 2>, int> edges;  // sorted node pair -> facet pos
    for (std::size_t i = 0; i < fl.size(); ++i) {
      const int f = fl[i];
      for (int skip = 0; skip < mesh.dim; ++skip) {
        std::array<int, 2> key{-1, -1};
        int c = 0;
        for (int v = 0; v < mesh.dim; ++v)
          if (v != skip) key[static_cast<std::size_t>(c++)] =
              mesh.boundary_facets(f, v);
        if (mesh.dim == 2) key[1] = key[0];  // 2D: connectivity via nodes
        std::sort(key.begin(), key.end());
        auto it = edges.find(key);
        if (it == edges.end())
          edges[key] = static_cast<int>(i);
        else
          uf.unite(it->second, static_cast<int>(i));
      }
    }
    const int root = uf.find(0);
    for (std::size_t i = 1; i < fl.size(); ++i)
      if (uf.find(static_cast<int>(i)) != root)
        throw Error("electrodes: electrode " + std::to_string(m) +
                    " facet set is disconnected");
  }

  std::vector<int> nodes;
  for (const auto& fl : layout.facets)
    for (int f : fl)
      for (int v = 0; v < mesh.dim; ++v)
        nodes.push_back(mesh.boundary_facets(f, v));
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  layout.electrode_nodes = std::move(nodes);
  return layout;
}

}  // namespace eit
