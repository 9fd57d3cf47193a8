#include "eit/cem.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cmath>

#include "eit/common.hpp"

namespace eit {

Eigen::MatrixXd build_current_basis(int M) {
  if (M < 2) throw Error("current basis: M >= 2 required");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(M, M - 1);
  for (int m = 0; m < M - 1; ++m) {
    const double s = 1.0 / std::sqrt(double(m + 1) * double(m + 2));
    for (int i = 0; i <= m; ++i) C(i, m) = s;
    C(m + 1, m) = -double(m + 1) * s;
  }
  return C;
}

CurrentPatterns basis_patterns(const Eigen::MatrixXd& C) {
  return CurrentPatterns{C};
}

CurrentPatterns pair_patterns(int M) {
  if (M < 2) throw Error("patterns: M >= 2 required");
  Eigen::MatrixXd I = Eigen::MatrixXd::Zero(M, M - 1);
  for (int l = 0; l < M - 1; ++l) {
    I(l, l) = 1.0;
    I(l + 1, l) = -1.0;
  }
  return CurrentPatterns{I};
}

void validate_patterns(const CurrentPatterns& patterns, int M) {
  const auto& I = patterns.currents;
  if (I.rows() != M) throw Error("patterns: row count != electrode count");
  if (I.cols() < 1) throw Error("patterns: at least one pattern required");
  const double scale = I.cwiseAbs().maxCoeff();
  for (Eigen::Index l = 0; l < I.cols(); ++l)
    if (std::abs(I.col(l).sum()) > 1e-12 * std::max(1.0, scale))
      throw Error("patterns: column " + std::to_string(l) +
                  " violates charge conservation");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(I);
  if (lu.rank() < I.cols()) throw Error("patterns: columns linearly dependent");
}

namespace {

int value_index(const Eigen::SparseMatrix<double>& A, int row, int col) {
  for (int idx = static_cast<int>(A.outerIndexPtr()[col]);
       idx < static_cast<int>(A.outerIndexPtr()[col + 1]); ++idx)
    if (A.innerIndexPtr()[idx] == row) return idx;
  throw Error("assembly: entry missing from sparsity pattern");
}

}  // namespace

AffineSystem assemble_affine(std::shared_ptr<const Mesh> mesh,
                             ElectrodeLayout layout, Eigen::MatrixXd C) {
  if (!mesh) throw Error("assemble_affine: null mesh");
  const int d = mesh->dim;
  const Eigen::Index N = mesh->node_count();
  const int M = layout.M;
  if (C.rows() != M || C.cols() != M - 1)
    throw Error("assemble_affine: basis shape mismatch");

  AffineSystem sys;
  sys.mesh = mesh;
  sys.layout = std::move(layout);
  sys.C = std::move(C);
  sys.N = N;
  sys.M = M;

  const Eigen::Index E = mesh->element_count();
  const int nv = d + 1;
  sys.element_stiffness.resize(E, nv * nv);
  for (Eigen::Index e = 0; e < E; ++e) {
    const auto G = mesh->shape_gradients.middleRows(e * nv, nv);  // nv x d
    const Eigen::MatrixXd S = mesh->element_volumes[e] * (G * G.transpose());
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j) sys.element_stiffness(e, i * nv + j) = S(i, j);
  }

  // Contact blocks B_m. Facet mass over a (d-1)-simplex with d vertices:
  // |f|/(d(d+1)) * (ones + I); single-function integral |f|/d.
  const Eigen::Index size = N + M - 1;
  sys.contact_blocks.resize(static_cast<std::size_t>(M));
  using T = Eigen::Triplet<double>;
  std::vector<T> all_triplets;
  for (int m = 0; m < M; ++m) {
    std::vector<T> trips;
    for (int f : sys.layout.facets[static_cast<std::size_t>(m)]) {
      const double area = mesh->facet_areas[f];
      const double off_diag = area / (d * (d + 1));
      for (int a = 0; a < d; ++a) {
        const int ga = mesh->boundary_facets(f, a);
        for (int b = 0; b < d; ++b) {
          const int gb = mesh->boundary_facets(f, b);
          trips.emplace_back(ga, gb, off_diag * (a == b ? 2.0 : 1.0));
        }
        // Coupling to the electrode potential expansion U = C beta.
        const double integ = area / d;
        for (int beta = 0; beta < M - 1; ++beta) {
          const double v = -integ * sys.C(m, beta);
          trips.emplace_back(ga, static_cast<int>(N) + beta, v);
          trips.emplace_back(static_cast<int>(N) + beta, ga, v);
        }
      }
    }
    const double area_m = sys.layout.areas[m];
    for (int b1 = 0; b1 < M - 1; ++b1)
      for (int b2 = 0; b2 < M - 1; ++b2)
        trips.emplace_back(static_cast<int>(N) + b1, static_cast<int>(N) + b2,
                           area_m * sys.C(m, b1) * sys.C(m, b2));
    Eigen::SparseMatrix<double> Bm(size, size);
    Bm.setFromTriplets(trips.begin(), trips.end());
    Bm.makeCompressed();
    sys.contact_blocks[static_cast<std::size_t>(m)] = std::move(Bm);
    all_triplets.insert(all_triplets.end(), trips.begin(), trips.end());
  }

  // Union sparsity pattern of interior stiffness and contact blocks.
  for (Eigen::Index e = 0; e < E; ++e)
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        all_triplets.emplace_back(mesh->elements(e, i), mesh->elements(e, j),
                                  1.0);
  sys.pattern.resize(size, size);
  sys.pattern.setFromTriplets(all_triplets.begin(), all_triplets.end());
  sys.pattern.makeCompressed();
  std::fill(sys.pattern.valuePtr(),
            sys.pattern.valuePtr() + sys.pattern.nonZeros(), 0.0);

  sys.element_offsets.resize(E, nv * nv);
  for (Eigen::Index e = 0; e < E; ++e)
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        sys.element_offsets(e, i * nv + j) =
            value_index(sys.pattern, mesh->elements(e, i), mesh->elements(e, j));

  sys.contact_scatter.resize(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const auto& Bm = sys.contact_blocks[static_cast<std::size_t>(m)];
    auto& scatter = sys.contact_scatter[static_cast<std::size_t>(m)];
    for (int col = 0; col < Bm.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(Bm, col); it; ++it)
        scatter.emplace_back(value_index(sys.pattern, static_cast<int>(it.row()), col),
                             it.value());
  }
  return sys;
}

Eigen::SparseMatrix<double> assemble_A(const AffineSystem& sys,
                                       const Eigen::VectorXd& sigma,
                                       const Eigen::VectorXd& z) {
  if (sigma.size() != sys.N) throw Error("assemble_A: sigma length != n");
  if (z.size() != sys.M) throw Error("assemble_A: z length != M");

  Eigen::SparseMatrix<double> A = sys.pattern;
  double* vals = A.valuePtr();
  const Mesh& mesh = *sys.mesh;
  const int nv = mesh.dim + 1;
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    double sbar = 0.0;
    for (int v = 0; v < nv; ++v) sbar += sigma[mesh.elements(e, v)];
    sbar /= nv;
    for (int idx = 0; idx < nv * nv; ++idx)
      vals[sys.element_offsets(e, idx)] += sbar * sys.element_stiffness(e, idx);
  }
  for (int m = 0; m < sys.M; ++m) {
    const double inv_z = 1.0 / z[m];
    for (const auto& [off, v] : sys.contact_scatter[static_cast<std::size_t>(m)])
      vals[off] += inv_z * v;
  }
  return A;
}

Eigen::SparseMatrix<double> assemble_interior_stiffness(
    const Mesh& mesh, const Eigen::VectorXd& sigma) {
  if (sigma.size() != mesh.node_count())
    throw Error("interior stiffness: sigma length != n");
  const int nv = mesh.dim + 1;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.element_count()) * nv * nv);
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    double sbar = 0.0;
    for (int v = 0; v < nv; ++v) sbar += sigma[mesh.elements(e, v)];
    sbar /= nv;
    const auto G = mesh.shape_gradients.middleRows(e * nv, nv);
    const Eigen::MatrixXd S =
        sbar * mesh.element_volumes[e] * (G * G.transpose());
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        trips.emplace_back(mesh.elements(e, i), mesh.elements(e, j), S(i, j));
  }
  Eigen::SparseMatrix<double> K(mesh.node_count(), mesh.node_count());
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();
  return K;
}

Eigen::SparseMatrix<double> assemble_mass(const Mesh& mesh) {
  const int nv = mesh.dim + 1;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.element_count()) * nv * nv);
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    // Simplex mass: vol/((d+1)(d+2)) * (ones + I).
    const double s = mesh.element_volumes[e] / (nv * (nv + 1));
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        trips.emplace_back(mesh.elements(e, i), mesh.elements(e, j),
                           s * (i == j ? 2.0 : 1.0));
  }
  Eigen::SparseMatrix<double> Mmat(mesh.node_count(), mesh.node_count());
  Mmat.setFromTriplets(trips.begin(), trips.end());
  Mmat.makeCompressed();
  return Mmat;
}

ForwardSolution solve_forward(const AffineSystem& sys,
                              const Eigen::VectorXd& sigma,
                              const Eigen::VectorXd& z,
                              const CurrentPatterns& patterns) {
  if ((sigma.array() <= 0).any())
    throw Error("solve_forward: non-positive conductivity");
  if ((z.array() <= 0).any())
    throw Error("solve_forward: non-positive contact resistance");
  validate_patterns(patterns, sys.M);

  const Eigen::Index size = sys.size();
  const Eigen::Index L = patterns.count();
  const int M = sys.M;

  Eigen::SparseMatrix<double> A = assemble_A(sys, sigma, z);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
  if (llt.info() != Eigen::Success)
    throw Error("solve_forward: factorization failed (matrix not SPD)");

  Eigen::MatrixXd rhs(size, L + M);
  rhs.setZero();
  rhs.block(sys.N, 0, M - 1, L) = sys.C.transpose() * patterns.currents;
  rhs.block(sys.N, L, M - 1, M) = sys.C.transpose();

  const Eigen::MatrixXd sol = llt.solve(rhs);

  ForwardSolution fs;
  fs.X = sol.leftCols(L);
  fs.X0 = sol.rightCols(M);
  fs.U = sys.C * fs.X.bottomRows(M - 1);
  fs.Uvec = vectorize(fs.U);
  return fs;
}

}  // namespace eit
