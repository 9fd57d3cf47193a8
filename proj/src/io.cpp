#include "eit/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "eit/common.hpp"

namespace eit {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd json_to_vector(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

void write_vtk(const Mesh& mesh, const Eigen::VectorXd& field,
               const std::string& path) {
  if (field.size() != mesh.node_count())
    throw Error("vtk: field length != node count");
  std::ofstream out(path);
  if (!out) throw Error("vtk: cannot write '" + path + "'");

  out << "# vtk DataFile Version 3.0\n"
      << "conductivity field\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.node_count() << " double\n";
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i) {
    out << fmt17(mesh.nodes(i, 0)) << ' ' << fmt17(mesh.nodes(i, 1)) << ' '
        << fmt17(mesh.dim == 3 ? mesh.nodes(i, 2) : 0.0) << '\n';
  }
  const int nv = mesh.dim + 1;
  out << "CELLS " << mesh.element_count() << ' '
      << mesh.element_count() * (nv + 1) << '\n';
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e) {
    out << nv;
    for (int v = 0; v < nv; ++v) out << ' ' << mesh.elements(e, v);
    out << '\n';
  }
  const int cell_type = mesh.dim == 3 ? 10 : 5;  // tetra / triangle
  out << "CELL_TYPES " << mesh.element_count() << '\n';
  for (Eigen::Index e = 0; e < mesh.element_count(); ++e)
    out << cell_type << '\n';
  out << "POINT_DATA " << mesh.node_count() << '\n'
      << "SCALARS conductivity double 1\n"
      << "LOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i)
    out << fmt17(field[i]) << '\n';
  if (!out) throw Error("vtk: write failed");
}

void save_measurement(const MeasurementFrame& frame, std::uint64_t config_hash,
                      const std::string& mesh_path, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["config_hash"] = hex_id(config_hash);
  j["seed"] = frame.seed;
  j["M"] = frame.M;
  j["L"] = frame.L;
  j["varsigma"] = frame.varsigma;
  j["gamma"] = frame.gamma;
  json pats = json::array();
  for (Eigen::Index r = 0; r < frame.patterns.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < frame.patterns.cols(); ++c)
      row.push_back(frame.patterns(r, c));
    pats.push_back(row);
  }
  j["patterns"] = pats;
  j["voltages"] = vector_to_json(frame.voltages);
  j["provenance"] = {{"mesh_path", mesh_path},
                     {"mesh_id", hex_id(frame.mesh_id)},
                     {"phantom_id", frame.phantom_id}};
  std::ofstream out(path);
  if (!out) throw Error("measurement: cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

LoadedMeasurement load_measurement(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("measurement: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("measurement: parse failure: " + std::string(e.what()));
  }

  LoadedMeasurement lm;
  lm.frame.M = j.at("M").get<int>();
  lm.frame.L = j.at("L").get<int>();
  lm.frame.seed = j.at("seed").get<std::uint64_t>();
  lm.frame.varsigma = j.value("varsigma", 0.0);
  lm.frame.gamma = j.at("gamma").get<double>();
  lm.config_hash = std::stoull(j.value("config_hash", "0"), nullptr, 16);
  const auto& pats = j.at("patterns");
  lm.frame.patterns.resize(lm.frame.M, lm.frame.L);
  for (int r = 0; r < lm.frame.M; ++r)
    for (int l = 0; l < lm.frame.L; ++l)
      lm.frame.patterns(r, l) = pats.at(r).at(l).get<double>();
  lm.frame.voltages = json_to_vector(j.at("voltages"));
  if (lm.frame.voltages.size() !=
      static_cast<Eigen::Index>(lm.frame.M) * lm.frame.L)
    throw Error("measurement: voltage vector length != L*M");
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    lm.mesh_path = p.value("mesh_path", std::string());
    lm.frame.mesh_id = std::stoull(p.value("mesh_id", "0"), nullptr, 16);
    lm.frame.phantom_id = p.value("phantom_id", std::string());
  }

  // Ground convention: project every pattern block onto the zero-sum
  // subspace. Data recorded with a different ground stays usable.
  const int M = lm.frame.M;
  for (int l = 0; l < lm.frame.L; ++l) {
    auto block = lm.frame.voltages.segment(static_cast<Eigen::Index>(l) * M, M);
    block.array() -= block.mean();
  }
  return lm;
}

void save_result(const ReconstructionResult& result, std::uint64_t config_hash,
                 std::uint64_t noise_seed, const std::string& mesh_path,
                 std::uint64_t mesh_id, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["config_hash"] = hex_id(config_hash);
  j["seed"] = noise_seed;
  j["engine"] = result.engine;
  j["mesh"] = {{"path", mesh_path}, {"id", hex_id(mesh_id)}};
  j["converged"] = result.converged;
  j["aborted_divergence"] = result.aborted_divergence;
  j["outer_iterations"] = result.outer_iterations;
  j["epsilon"] = result.epsilon;
  j["initial_discrepancy"] = result.initial_discrepancy;
  j["final_discrepancy"] = result.final_discrepancy;

  json hist = json::array();
  for (const auto& r : result.history) {
    hist.push_back({{"iter", r.iteration},
                    {"inner", r.inner_iterations},
                    {"inner_converged", r.inner_converged},
                    {"discrepancy", r.discrepancy},
                    {"phi_p", r.objective}});
  }
  j["history"] = hist;

  // Wall-clock data lives in its own section; determinism comparisons and
  // the config hash exclude it.
  json timings = json::array();
  for (const auto& r : result.history) {
    timings.push_back({{"iter", r.iteration},
                       {"forward_s", r.forward_seconds},
                       {"jacobian_s", r.jacobian_seconds},
                       {"inner_s", r.inner_seconds},
                       {"total_s", r.total_seconds}});
  }
  j["timings"] = timings;
  j["sigma_file"] = path + ".sigma.txt";

  std::ofstream out(path);
  if (!out) throw Error("result: cannot write '" + path + "'");
  out << j.dump(2) << '\n';

  std::ofstream sf(path + ".sigma.txt");
  if (!sf) throw Error("result: cannot write '" + path + ".sigma.txt'");
  for (Eigen::Index i = 0; i < result.sigma.size(); ++i)
    sf << fmt17(result.sigma[i]) << '\n';
}

LoadedResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("result: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("result: parse failure: " + std::string(e.what()));
  }

  LoadedResult lr;
  lr.config_hash = std::stoull(j.value("config_hash", "0"), nullptr, 16);
  lr.result.engine = j.value("engine", "");
  lr.result.converged = j.at("converged").get<bool>();
  lr.result.aborted_divergence = j.value("aborted_divergence", false);
  lr.result.outer_iterations = j.at("outer_iterations").get<int>();
  lr.result.epsilon = j.at("epsilon").get<double>();
  lr.result.initial_discrepancy = j.value("initial_discrepancy", 0.0);
  lr.result.final_discrepancy = j.at("final_discrepancy").get<double>();
  lr.mesh_path = j.at("mesh").at("path").get<std::string>();
  lr.mesh_id = std::stoull(j.at("mesh").at("id").get<std::string>(), nullptr, 16);

  for (const auto& h : j.at("history")) {
    IterationRecord r;
    r.iteration = h.at("iter").get<int>();
    r.inner_iterations = h.at("inner").get<int>();
    r.inner_converged = h.value("inner_converged", false);
    r.discrepancy = h.at("discrepancy").get<double>();
    r.objective = h.at("phi_p").get<double>();
    lr.result.history.push_back(r);
  }
  if (j.contains("timings")) {
    std::size_t i = 0;
    for (const auto& t : j.at("timings")) {
      if (i >= lr.result.history.size()) break;
      lr.result.history[i].forward_seconds = t.value("forward_s", 0.0);
      lr.result.history[i].jacobian_seconds = t.value("jacobian_s", 0.0);
      lr.result.history[i].inner_seconds = t.value("inner_s", 0.0);
      lr.result.history[i].total_seconds = t.value("total_s", 0.0);
      ++i;
    }
  }

  const std::string sigma_path = j.value("sigma_file", path + ".sigma.txt");
  std::ifstream sf(sigma_path);
  if (!sf) throw Error("result: cannot open '" + sigma_path + "'");
  std::vector<double> vals;
  double v = 0;
  while (sf >> v) vals.push_back(v);
  lr.result.sigma = Eigen::Map<Eigen::VectorXd>(vals.data(),
                                                static_cast<Eigen::Index>(vals.size()));
  return lr;
}

CompareReport compare_results(const LoadedResult& a, const LoadedResult& b) {
  if (a.mesh_id != b.mesh_id)
    throw Error("compare: results come from different meshes");
  const Mesh mesh = load_mesh(a.mesh_path);
  if (mesh.content_id != a.mesh_id)
    throw Error("compare: mesh file does not match the recorded mesh id");
  if (a.result.sigma.size() != mesh.node_count() ||
      b.result.sigma.size() != mesh.node_count())
    throw Error("compare: field length != node count");

  const Eigen::SparseMatrix<double> Mm = assemble_mass(mesh);
  const Eigen::VectorXd diff = a.result.sigma - b.result.sigma;
  const double na = std::sqrt(a.result.sigma.dot(Mm * a.result.sigma));
  const double nb = std::sqrt(b.result.sigma.dot(Mm * b.result.sigma));
  const double nd = std::sqrt(diff.dot(Mm * diff));

  CompareReport rep;
  rep.relative_l2 = nd / std::max(na, nb);

  auto mean_phase = [](const ReconstructionResult& r, auto getter) {
    if (r.history.empty()) return 0.0;
    double s = 0.0;
    for (const auto& h : r.history) s += getter(h);
    return s / static_cast<double>(r.history.size());
  };
  auto fwd = [](const IterationRecord& h) { return h.forward_seconds; };
  auto jac = [](const IterationRecord& h) { return h.jacobian_seconds; };
  auto fj = [](const IterationRecord& h) {
    return h.forward_seconds + h.jacobian_seconds;
  };
  const double bf = mean_phase(b.result, fwd), bj = mean_phase(b.result, jac),
               bfj = mean_phase(b.result, fj);
  rep.forward_time_ratio = bf > 0 ? mean_phase(a.result, fwd) / bf : 0.0;
  rep.jacobian_time_ratio = bj > 0 ? mean_phase(a.result, jac) / bj : 0.0;
  rep.forward_plus_jacobian_ratio =
      bfj > 0 ? mean_phase(a.result, fj) / bfj : 0.0;

  std::ostringstream tab;
  tab << "field              A (" << a.result.engine << ")  vs  B ("
      << b.result.engine << ")\n"
      << "relative L2 diff   " << rep.relative_l2 << "\n"
      << "outer iterations   " << a.result.outer_iterations << "  /  "
      << b.result.outer_iterations << "\n"
      << "final discrepancy  " << a.result.final_discrepancy << "  /  "
      << b.result.final_discrepancy << "\n"
      << "fwd+jac time/iter  " << mean_phase(a.result, fj) << "s  /  "
      << mean_phase(b.result, fj) << "s  (ratio "
      << rep.forward_plus_jacobian_ratio << ")\n";
  rep.table = tab.str();
  return rep;
}

}  // namespace eit
