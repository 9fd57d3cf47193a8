// eitk: command-line driver for the EIT reconstruction pipeline.
//
// Subcommands: simulate (synthetic data), build-rb (offline reduced basis),
// reconstruct (full or reduced engine), compare (result diffing).
// Exit codes: 0 success, 2 validation error, 3 reconstruction did not
// converge (the result file is still written).

#include <CLI11.hpp>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>

#include "eit/common.hpp"
#include "eit/config.hpp"
#include "eit/io.hpp"
#include "eit/inversion.hpp"
#include "eit/rom.hpp"
#include "eit/sampling.hpp"
#include "eit/sensitivity.hpp"
#include "eit/simulator.hpp"

namespace {

using namespace eit;

CurrentPatterns make_patterns(const PatternSpec& spec, int M,
                              const Eigen::MatrixXd& C) {
  switch (spec.kind) {
    case PatternSpec::Kind::Basis:
      return basis_patterns(C);
    case PatternSpec::Kind::Pairs:
      return pair_patterns(M);
    case PatternSpec::Kind::Explicit: {
      CurrentPatterns p{spec.matrix};
      validate_patterns(p, M);
      return p;
    }
  }
  throw Error("unreachable pattern kind");
}

struct Assembled {
  std::shared_ptr<const Mesh> mesh;
  ElectrodeLayout layout;
  AffineSystem sys;
  CurrentPatterns patterns;
};

Assembled assemble_from_config(const RunConfig& cfg, const std::string& mesh_path) {
  if (mesh_path.empty()) throw Error("config: missing mesh path");
  if (cfg.electrodes.empty()) throw Error("config: missing electrode spec");
  Assembled a;
  a.mesh = std::make_shared<Mesh>(load_mesh(mesh_path));
  a.layout = assign_electrodes(*a.mesh, cfg.electrodes);
  const Eigen::MatrixXd C = build_current_basis(a.layout.M);
  a.patterns = make_patterns(cfg.patterns, a.layout.M, C);
  a.sys = assemble_affine(a.mesh, a.layout, C);
  return a;
}

int cmd_simulate(const std::string& config_path, std::string out,
                 std::uint64_t seed_override, bool has_seed) {
  RunConfig cfg = load_config(config_path);
  if (cfg.mesh_simulation.empty())
    throw Error("config: simulate requires mesh.simulation");
  Assembled a = assemble_from_config(cfg, cfg.mesh_simulation);

  if (!cfg.mesh_reconstruction.empty()) {
    const Mesh recon = load_mesh(cfg.mesh_reconstruction);
    if (a.mesh->node_count() < 2 * recon.node_count())
      std::cerr << "warning: simulation mesh has fewer than 2x the "
                   "reconstruction mesh nodes; inverse-crime margin is thin\n";
  }

  const std::uint64_t seed = has_seed ? seed_override : cfg.seeds.simulate;
  MeasurementFrame frame =
      simulate(a.sys, cfg.phantom, a.patterns, cfg.varsigma, seed);
  frame.phantom_id = phantom_id(cfg.phantom);

  if (out.empty()) out = "measurement.json";
  save_measurement(frame, cfg.config_hash, cfg.mesh_simulation, out);
  std::cout << "wrote " << out << " (LM = " << frame.L * frame.M
            << ", gamma = " << frame.gamma << ")\n";
  return 0;
}

int cmd_build_rb(const std::string& config_path, std::string out,
                 std::uint64_t seed_override, bool has_seed) {
  RunConfig cfg = load_config(config_path);
  if (cfg.draws <= cfg.basis_dim)
    throw Error("config: snapshot count K must exceed basis dimension k");
  Assembled a = assemble_from_config(cfg, cfg.mesh_reconstruction);

  const Eigen::VectorXd sigma0 =
      Eigen::VectorXd::Constant(a.mesh->node_count(), cfg.sigma0);
  const FieldPrior prior =
      build_field_prior(*a.mesh, sigma0, cfg.omega, cfg.ell, cfg.zeta0,
                        cfg.eta, cfg.lowrank_covariance);

  const std::uint64_t seed = has_seed ? seed_override : cfg.seeds.snapshots;
  std::cout << "drawing " << cfg.draws
            << (cfg.count_columns ? " snapshot columns" : " snapshot draws")
            << "...\n";
  const SnapshotLibrary lib =
      generate_snapshots(a.sys, prior, cfg.draws, a.patterns, seed,
                         cfg.count_columns, &std::cerr);

  ReducedBasis basis = pod_basis(lib, cfg.basis_dim, cfg.oversampling,
                                 cfg.power_iters, cfg.seeds.pod);
  basis.omega = cfg.omega;
  basis.ell = cfg.ell;
  basis.eta = cfg.eta;
  basis.zeta0 = cfg.zeta0;
  basis.sigma0 = sigma0;
  basis.electrode_count = a.layout.M;

  if (out.empty()) out = "basis.rb";
  save_basis(out, basis);

  const auto& sv = basis.singular_values;
  std::cout << "basis: k = " << basis.k << ", s_1 = " << sv[0]
            << ", s_k = " << sv[sv.size() - 1]
            << ", s_k/s_1 = " << sv[sv.size() - 1] / sv[0]
            << (basis.rank_deficient ? "  [rank deficient]" : "") << "\n"
            << "wrote " << out << "\n";
  return 0;
}

int cmd_reconstruct(const std::string& config_path, const std::string& data_path,
                    std::string out, const std::string& engine_override,
                    const std::string& basis_override, bool vtk_flag) {
  RunConfig cfg = load_config(config_path);
  if (!engine_override.empty()) cfg.engine = engine_override;
  if (!basis_override.empty()) cfg.basis_file = basis_override;
  if (cfg.engine == "reduced" && cfg.basis_file.empty())
    throw Error("config: engine=reduced requires a basis file");

  Assembled a = assemble_from_config(cfg, cfg.mesh_reconstruction);
  const LoadedMeasurement lm = load_measurement(data_path);
  if (lm.frame.M != a.layout.M)
    throw Error("measurement/electrode count mismatch");
  if (lm.frame.mesh_id != 0 && lm.frame.mesh_id == a.mesh->content_id)
    std::cerr << "warning: measurement and reconstruction share a mesh "
                 "(inverse crime)\n";

  CurrentPatterns patterns{lm.frame.patterns};
  validate_patterns(patterns, a.layout.M);

  const Eigen::VectorXd sigma0 =
      Eigen::VectorXd::Constant(a.mesh->node_count(), cfg.sigma0);
  const Eigen::VectorXd z0 =
      Eigen::VectorXd::Constant(a.layout.M, cfg.zeta0);

  NoiseModel noise;
  noise.gamma = cfg.gamma_override > 0 ? cfg.gamma_override : lm.frame.gamma;
  noise.L = lm.frame.L;
  noise.M = lm.frame.M;
  noise.morozov_scale = cfg.morozov_scale;
  if (!(noise.gamma > 0))
    throw Error("noise level unset: measurement has gamma 0 and no override");

  // Offline pieces: contact Jacobian at the initial guess and the projector.
  const FreeNodeMap map = make_free_node_map(*a.mesh, a.layout);
  const ForwardSolution fs0 = solve_forward(a.sys, sigma0, z0, patterns);
  const Eigen::MatrixXd Jz = jacobian_z(a.sys, fs0, z0);
  const ProjectionOperator P = build_projection(Jz);

  InversionConfig icfg;
  icfg.T = cfg.T;
  icfg.delta = cfg.delta;
  icfg.max_outer = cfg.max_outer;
  icfg.max_inner = cfg.max_inner;

  std::unique_ptr<ForwardEngine> engine;
  ReducedSystem rsys;
  if (cfg.engine == "reduced") {
    ReducedBasis basis = load_basis(cfg.basis_file);
    if (basis.Qhat.rows() != a.mesh->node_count())
      throw Error("basis/mesh dimension mismatch (N differs)");
    if (basis.electrode_count != 0 && basis.electrode_count != a.layout.M)
      throw Error("basis/electrode count mismatch");
    rsys = reduce_system(a.sys, basis);
    engine = std::make_unique<ReducedEngine>(rsys, patterns);
  } else {
    engine = std::make_unique<FullEngine>(a.sys, patterns);
  }

  const ReconstructionResult result =
      outer_iterate(icfg, *engine, a.sys, map, P, noise, lm.frame.voltages,
                    sigma0, z0, &std::cout);

  if (out.empty()) out = "result.json";
  save_result(result, cfg.config_hash, lm.frame.seed, cfg.mesh_reconstruction,
              a.mesh->content_id, out);
  if (vtk_flag || cfg.write_vtk) write_vtk(*a.mesh, result.sigma, out + ".vtk");

  std::cout << (result.converged ? "converged" : "NOT converged") << " after "
            << result.outer_iterations
            << " outer iterations, discrepancy = " << result.final_discrepancy
            << " (epsilon = " << result.epsilon << ")\n"
            << "wrote " << out << "\n";
  return result.converged ? 0 : 3;
}

int cmd_compare(const std::string& a_path, const std::string& b_path,
                const std::string& out) {
  const LoadedResult a = load_result(a_path);
  const LoadedResult b = load_result(b_path);
  const CompareReport rep = compare_results(a, b);
  std::cout << rep.table;
  if (!out.empty()) {
    nlohmann::json j;
    j["relative_l2"] = rep.relative_l2;
    j["forward_time_ratio"] = rep.forward_time_ratio;
    j["jacobian_time_ratio"] = rep.jacobian_time_ratio;
    j["forward_plus_jacobian_ratio"] = rep.forward_plus_jacobian_ratio;
    j["a"] = a_path;
    j["b"] = b_path;
    std::ofstream os(out);
    os << j.dump(2) << '\n';
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EIT reconstruction toolkit"};
  app.require_subcommand(1);

  std::string config_path, data_path, out, engine, basis, a_path, b_path;
  std::uint64_t seed = 0;
  bool vtk = false;

  auto* sim = app.add_subcommand("simulate", "generate synthetic measurements");
  sim->add_option("--config", config_path)->required();
  sim->add_option("--out", out);
  auto* sim_seed = sim->add_option("--seed", seed);

  auto* rb = app.add_subcommand("build-rb", "build the reduced basis offline");
  rb->add_option("--config", config_path)->required();
  rb->add_option("--out", out);
  auto* rb_seed = rb->add_option("--seed", seed);

  auto* rec = app.add_subcommand("reconstruct", "run the inversion");
  rec->add_option("--config", config_path)->required();
  rec->add_option("--data", data_path)->required();
  rec->add_option("--out", out);
  rec->add_option("--engine", engine)->check(CLI::IsMember({"full", "reduced"}));
  rec->add_option("--basis", basis);
  rec->add_flag("--vtk", vtk);

  auto* cmp = app.add_subcommand("compare", "compare two results");
  cmp->add_option("--a", a_path)->required();
  cmp->add_option("--b", b_path)->required();
  cmp->add_option("--out", out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, out, seed, !sim_seed->empty());
    if (rb->parsed())
      return cmd_build_rb(config_path, out, seed, !rb_seed->empty());
    if (rec->parsed())
      return cmd_reconstruct(config_path, data_path, out, engine, basis, vtk);
    if (cmp->parsed()) return cmd_compare(a_path, b_path, out);
  } catch (const eit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
