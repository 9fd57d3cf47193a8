#pragma once

#include <cstdint>
#include <string>

#include "eit/inversion.hpp"
#include "eit/mesh.hpp"
#include "eit/simulator.hpp"

namespace eit {

/// Legacy ASCII VTK unstructured grid with one point-data scalar field
/// named "conductivity".
void write_vtk(const Mesh& mesh, const Eigen::VectorXd& field,
               const std::string& path);

void save_measurement(const MeasurementFrame& frame, std::uint64_t config_hash,
                      const std::string& mesh_path, const std::string& path);

struct LoadedMeasurement {
  MeasurementFrame frame;
  std::uint64_t config_hash = 0;
  std::string mesh_path;
};

/// Loads a measurement file and normalizes each pattern's voltage block to
/// the zero-sum subspace (ground convention at ingestion).
LoadedMeasurement load_measurement(const std::string& path);

/// Result JSON (history, timings in a separate section) plus the nodal field
/// as a plain-text sidecar `<path>.sigma.txt`.
void save_result(const ReconstructionResult& result, std::uint64_t config_hash,
                 std::uint64_t noise_seed, const std::string& mesh_path,
                 std::uint64_t mesh_id, const std::string& path);

struct LoadedResult {
  ReconstructionResult result;
  std::uint64_t config_hash = 0;
  std::string mesh_path;
  std::uint64_t mesh_id = 0;
};

LoadedResult load_result(const std::string& path);

struct CompareReport {
  double relative_l2 = 0.0;  // mass-weighted ||a-b|| / max(||a||,||b||)
  double forward_time_ratio = 0.0;   // a / b, per-outer-iteration means
  double jacobian_time_ratio = 0.0;
  double forward_plus_jacobian_ratio = 0.0;
  std::string table;  // human-readable summary
};

CompareReport compare_results(const LoadedResult& a, const LoadedResult& b);

}  // namespace eit
