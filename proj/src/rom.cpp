#include "eit/rom.hpp"

#include <Eigen/Dense>
#include <cstring>
#include <fstream>
#include <ostream>

#include "eit/common.hpp"
#include "eit/rng.hpp"

namespace eit {

SnapshotLibrary generate_snapshots(const AffineSystem& sys,
                                   const FieldPrior& prior, int K,
                                   const CurrentPatterns& patterns,
                                   std::uint64_t seed, bool count_columns,
                                   std::ostream* log) {
  if (K < 1) throw Error("generate_snapshots: K >= 1 required");
  const Eigen::Index N = sys.N;
  const Eigen::Index L = patterns.count();

  SnapshotLibrary lib;
  lib.seed = seed;
  lib.requested = K;
  lib.count_columns = count_columns;

  const Eigen::Index target_cols = count_columns ? K : Eigen::Index(K) * L;
  lib.Y.resize(N, target_cols);

  Eigen::Index col = 0;
  std::uint64_t draw = 0;
  while (col < target_cols) {
    DrawRecord rec;
    rec.draw_index = draw;
    rec.sigma_seed = split_seed(seed, 2 * draw);
    rec.z_seed = split_seed(seed, 2 * draw + 1);
    ++draw;
    rec.sigma = sample_sigma(prior, rec.sigma_seed);
    rec.z = sample_contacts(prior, sys.M, rec.z_seed);
    ForwardSolution fs;
    try {
      fs = solve_forward(sys, rec.sigma, rec.z, patterns);
    } catch (const Error& err) {
      if (log)
        *log << "snapshot draw " << rec.draw_index << " (seed "
             << rec.sigma_seed << ") skipped: " << err.what() << "\n";
      continue;
    }
    const Eigen::Index take = std::min(L, target_cols - col);
    lib.Y.middleCols(col, take) = fs.X.topRows(N).leftCols(take);
    col += take;
    lib.records.push_back(std::move(rec));
  }
  return lib;
}

namespace {

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

}  // namespace

ReducedBasis pod_basis(const SnapshotLibrary& lib, int k, int oversampling,
                       int power_iters, std::uint64_t seed) {
  const Eigen::Index cols = lib.Y.cols();
  if (k < 1) throw Error("pod_basis: k >= 1 required");
  if (k > cols)
    throw Error("pod_basis: k exceeds snapshot column count");
  const Eigen::Index s = std::min<Eigen::Index>(k + oversampling, cols);

  // Range finder on the snapshot matrix; the correlation matrix Y Y^T is
  // never formed.
  Eigen::MatrixXd G = lib.Y * standard_normal_matrix(cols, s, seed);
  Eigen::MatrixXd Q = thin_q(G);
  for (int t = 0; t < power_iters; ++t) {
    const Eigen::MatrixXd Z = thin_q(lib.Y.transpose() * Q);
    Q = thin_q(lib.Y * Z);
  }

  const Eigen::MatrixXd B = Q.transpose() * lib.Y;  // s x cols
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();

  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-12 * sv[0]) ++rank;
  const Eigen::Index keep = std::min<Eigen::Index>(k, rank);

  ReducedBasis basis;
  basis.Qhat = Q * svd.matrixU().leftCols(keep);
  basis.singular_values = sv.head(keep);
  basis.k = static_cast<int>(keep);
  basis.rank_deficient = keep < k;
  basis.snapshot_seed = lib.seed;
  basis.draws = static_cast<int>(lib.records.size());
  return basis;
}

ReducedBasis truncate_basis(const ReducedBasis& basis, int k) {
  if (k < 1 || k > basis.k)
    throw Error("truncate_basis: k out of range");
  ReducedBasis out = basis;
  out.Qhat = basis.Qhat.leftCols(k);
  out.singular_values = basis.singular_values.head(k);
  out.k = k;
  return out;
}

ReducedSystem reduce_system(const AffineSystem& sys, const ReducedBasis& basis) {
  if (basis.Qhat.rows() != sys.N)
    throw Error("reduce_system: basis dimension != system size");

  ReducedSystem r;
  r.mesh = sys.mesh;
  r.Qhat = basis.Qhat;
  r.C = sys.C;
  r.N = sys.N;
  r.M = sys.M;
  r.k = basis.k;

  const Mesh& mesh = *sys.mesh;
  const int nv = mesh.dim + 1;
  const Eigen::Index E = mesh.element_count();

  r.element_stiffness = sys.element_stiffness;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(E) * nv * nv);
  for (Eigen::Index e = 0; e < E; ++e)
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        trips.emplace_back(mesh.elements(e, i), mesh.elements(e, j), 1.0);
  r.interior_pattern.resize(sys.N, sys.N);
  r.interior_pattern.setFromTriplets(trips.begin(), trips.end());
  r.interior_pattern.makeCompressed();
  std::fill(r.interior_pattern.valuePtr(),
            r.interior_pattern.valuePtr() + r.interior_pattern.nonZeros(), 0.0);
  r.element_offsets.resize(E, nv * nv);
  for (Eigen::Index e = 0; e < E; ++e)
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j) {
        const int row = mesh.elements(e, i), col = mesh.elements(e, j);
        int found = -1;
        for (int idx = static_cast<int>(r.interior_pattern.outerIndexPtr()[col]);
             idx < static_cast<int>(r.interior_pattern.outerIndexPtr()[col + 1]);
             ++idx)
          if (r.interior_pattern.innerIndexPtr()[idx] == row) {
            found = idx;
            break;
          }
        r.element_offsets(e, i * nv + j) = found;
      }

  // Reduced contact blocks Q^T B_m Q, dense (k+M-1)^2.
  const Eigen::Index rs = r.size();
  Eigen::MatrixXd Qfull = Eigen::MatrixXd::Zero(sys.size(), rs);
  Qfull.topLeftCorner(sys.N, r.k) = r.Qhat;
  Qfull.bottomRightCorner(sys.M - 1, sys.M - 1).setIdentity();
  r.contact_reduced.reserve(static_cast<std::size_t>(sys.M));
  for (int m = 0; m < sys.M; ++m)
    r.contact_reduced.push_back(
        Qfull.transpose() *
        (sys.contact_blocks[static_cast<std::size_t>(m)] * Qfull));
  return r;
}

Eigen::MatrixXd assemble_reduced_A(const ReducedSystem& rsys,
                                   const Eigen::VectorXd& sigma,
                                   const Eigen::VectorXd& z) {
  if (sigma.size() != rsys.N) throw Error("assemble_reduced_A: sigma length");
  if (z.size() != rsys.M) throw Error("assemble_reduced_A: z length");
  const Mesh& mesh = *rsys.mesh;
  const int nv = mesh.dim + 1;

  // Refill the interior stiffness values and project: Qhat^T (K(sigma) Qhat).
  Eigen::SparseMatrix<double> K = rsys.interior_pattern;
  double* vals = K.valuePtr();
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    double sbar = 0.0;
    for (int v = 0; v < nv; ++v) sbar += sigma[mesh.elements(e, v)];
    sbar /= nv;
    for (int idx = 0; idx < nv * nv; ++idx)
      vals[rsys.element_offsets(e, idx)] += sbar * rsys.element_stiffness(e, idx);
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rsys.size(), rsys.size());
  const Eigen::MatrixXd KQ = K * rsys.Qhat;  // N x k
  A.topLeftCorner(rsys.k, rsys.k).noalias() = rsys.Qhat.transpose() * KQ;
  for (int m = 0; m < rsys.M; ++m)
    A += (1.0 / z[m]) * rsys.contact_reduced[static_cast<std::size_t>(m)];
  // Congruence preserves symmetry; enforce it against roundoff drift.
  A = 0.5 * (A + A.transpose()).eval();
  return A;
}

ForwardSolution solve_reduced(const ReducedSystem& rsys,
                              const Eigen::VectorXd& sigma,
                              const Eigen::VectorXd& z,
                              const CurrentPatterns& patterns) {
  if ((sigma.array() <= 0).any())
    throw Error("solve_reduced: non-positive conductivity");
  if ((z.array() <= 0).any())
    throw Error("solve_reduced: non-positive contact resistance");
  validate_patterns(patterns, rsys.M);

  const Eigen::Index L = patterns.count();
  const int M = rsys.M;
  const Eigen::MatrixXd A = assemble_reduced_A(rsys, sigma, z);
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw Error("solve_reduced: reduced system not positive definite");

  // Projected right-hand sides Q^T [0; C^T I] and Q^T [0; C^T]: the interior
  // load is zero, so only the electrode block survives.
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(rsys.size(), L + M);
  rhs.block(rsys.k, 0, M - 1, L) = rsys.C.transpose() * patterns.currents;
  rhs.block(rsys.k, L, M - 1, M) = rsys.C.transpose();
  const Eigen::MatrixXd sol = llt.solve(rhs);

  // Lift X = Q Xhat and X0 = Q X0hat back to full dimension.
  ForwardSolution fs;
  fs.X.resize(rsys.N + M - 1, L);
  fs.X0.resize(rsys.N + M - 1, M);
  fs.X.topRows(rsys.N) = rsys.Qhat * sol.topLeftCorner(rsys.k, L);
  fs.X.bottomRows(M - 1) = sol.block(rsys.k, 0, M - 1, L);
  fs.X0.topRows(rsys.N) = rsys.Qhat * sol.topRightCorner(rsys.k, M);
  fs.X0.bottomRows(M - 1) = sol.block(rsys.k, L, M - 1, M);
  fs.U = rsys.C * fs.X.bottomRows(M - 1);
  fs.Uvec = vectorize(fs.U);
  return fs;
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error("basis file: truncated");
  return v;
}

constexpr char kMagic[8] = {'E', 'I', 'T', 'R', 'B', 'A', 'S', '1'};

}  // namespace

void save_basis(const std::string& path, const ReducedBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("basis file: cannot write '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, 1);  // format version
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(basis.Qhat.rows()));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(basis.k));
  write_pod<std::uint64_t>(out,
                           static_cast<std::uint64_t>(basis.electrode_count));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(basis.draws));
  write_pod<std::uint64_t>(out, basis.snapshot_seed);
  write_pod<std::uint8_t>(out, basis.rank_deficient ? 1 : 0);
  write_pod<double>(out, basis.omega);
  write_pod<double>(out, basis.ell);
  write_pod<double>(out, basis.eta);
  write_pod<double>(out, basis.zeta0);
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(basis.sigma0.size()));
  out.write(reinterpret_cast<const char*>(basis.sigma0.data()),
            sizeof(double) * basis.sigma0.size());
  write_pod<std::uint64_t>(out,
                           static_cast<std::uint64_t>(basis.singular_values.size()));
  out.write(reinterpret_cast<const char*>(basis.singular_values.data()),
            sizeof(double) * basis.singular_values.size());
  // Row-major Qhat so readers in other languages need no transpose.
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor q = basis.Qhat;
  out.write(reinterpret_cast<const char*>(q.data()), sizeof(double) * q.size());
  if (!out) throw Error("basis file: write failed");
}

ReducedBasis load_basis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("basis file: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("basis file: bad magic");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != 1) throw Error("basis file: unsupported version");

  ReducedBasis b;
  const auto N = read_pod<std::uint64_t>(in);
  const auto k = read_pod<std::uint64_t>(in);
  b.electrode_count = static_cast<int>(read_pod<std::uint64_t>(in));
  b.draws = static_cast<int>(read_pod<std::uint64_t>(in));
  b.snapshot_seed = read_pod<std::uint64_t>(in);
  b.rank_deficient = read_pod<std::uint8_t>(in) != 0;
  b.omega = read_pod<double>(in);
  b.ell = read_pod<double>(in);
  b.eta = read_pod<double>(in);
  b.zeta0 = read_pod<double>(in);
  const auto n0 = read_pod<std::uint64_t>(in);
  b.sigma0.resize(static_cast<Eigen::Index>(n0));
  in.read(reinterpret_cast<char*>(b.sigma0.data()), sizeof(double) * n0);
  const auto nsv = read_pod<std::uint64_t>(in);
  b.singular_values.resize(static_cast<Eigen::Index>(nsv));
  in.read(reinterpret_cast<char*>(b.singular_values.data()),
          sizeof(double) * nsv);
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor q(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(k));
  in.read(reinterpret_cast<char*>(q.data()), sizeof(double) * q.size());
  if (!in) throw Error("basis file: truncated");
  b.Qhat = q;
  b.k = static_cast<int>(k);
  return b;
}

}  // namespace eit
