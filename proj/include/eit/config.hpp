#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "eit/mesh.hpp"
#include "eit/simulator.hpp"

namespace eit {

struct PatternSpec {
  enum class Kind { Basis, Pairs, Explicit };
  Kind kind = Kind::Basis;
  Eigen::MatrixXd matrix;  // Explicit only
};

struct SeedBundle {
  std::uint64_t simulate = 1;
  std::uint64_t snapshots = 2;
  std::uint64_t pod = 3;
};

/// One JSON document drives every subcommand; each command reads the
/// sections it needs and validates them.
struct RunConfig {
  std::string mesh_reconstruction;
  std::string mesh_simulation;

  std::vector<ElectrodeDescriptor> electrodes;
  PatternSpec patterns;

  // Prior / offline parameters.
  double sigma0 = 1.0;
  double zeta0 = 1.0;
  double omega = 0.5;
  double ell = 1.0;
  double eta = 5e-4;
  int draws = 500;
  int basis_dim = 300;
  bool count_columns = false;
  int oversampling = 10;
  int power_iters = 1;
  bool lowrank_covariance = false;

  // TV parameters.
  double T = 1e-6;
  double delta = 1e-2;

  // Noise: fraction of the voltage spread, or an explicit gamma override.
  double varsigma = 0.0;
  double gamma_override = 0.0;  // 0 = use the measurement file's gamma

  std::string engine = "full";
  std::string basis_file;

  SeedBundle seeds;
  int max_outer = 50;
  int max_inner = 200;
  double morozov_scale = 1.0;

  Phantom phantom;
  bool write_vtk = false;

  std::uint64_t config_hash = 0;  // canonical-serialization hash
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Canonical hash: the sorted-key serialization of the configuration JSON.
std::uint64_t hash_config_json(const nlohmann::json& j);

std::vector<ElectrodeDescriptor> parse_electrodes(const nlohmann::json& j,
                                                  int dim_hint = 3);
Phantom parse_phantom(const nlohmann::json& j, int dim_hint = 3);
std::string phantom_id(const Phantom& phantom);

}  // namespace eit
