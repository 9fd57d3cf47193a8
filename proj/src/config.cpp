#include "eit/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "eit/common.hpp"

namespace eit {

using nlohmann::json;

namespace {

Eigen::VectorXd parse_vector(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw Error("config: " + what + " must be a nonempty array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

double require_positive(const json& j, const std::string& key, double fallback,
                        bool allow_zero = false) {
  double v = fallback;
  if (j.contains(key)) v = j.at(key).get<double>();
  if (allow_zero ? v < 0 : !(v > 0))
    throw Error("config: '" + key + "' must be " +
                (allow_zero ? "nonnegative" : "positive"));
  return v;
}

}  // namespace

std::vector<ElectrodeDescriptor> parse_electrodes(const json& j, int dim_hint) {
  if (!j.is_array() || j.size() < 2)
    throw Error("config: 'electrodes' must list at least 2 descriptors");
  std::vector<ElectrodeDescriptor> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    ElectrodeDescriptor d;
    const std::string type = e.value("type", "disk");
    if (type == "disk") {
      d.kind = ElectrodeDescriptor::Kind::Disk;
      d.center = parse_vector(e.at("center"), "electrode center");
      d.radius = e.at("radius").get<double>();
      if (!(d.radius > 0)) throw Error("config: electrode radius must be positive");
    } else if (type == "rect") {
      d.kind = ElectrodeDescriptor::Kind::Rect;
      d.center = parse_vector(e.at("center"), "electrode center");
      d.axis_u = parse_vector(e.at("axis_u"), "electrode axis_u");
      d.half_u = e.at("half_u").get<double>();
      if (e.contains("axis_v")) {
        d.axis_v = parse_vector(e.at("axis_v"), "electrode axis_v");
        d.half_v = e.at("half_v").get<double>();
      }
    } else {
      throw Error("config: unknown electrode type '" + type + "'");
    }
    if (e.contains("normal")) {
      d.normal = parse_vector(e.at("normal"), "electrode normal");
      d.normal_min_dot = e.value("normal_min_dot", 0.25);
    }
    if (d.center.size() != dim_hint)
      throw Error("config: electrode center dimension mismatch");
    out.push_back(std::move(d));
  }
  return out;
}

Phantom parse_phantom(const json& j, int dim_hint) {
  Phantom p;
  p.background = require_positive(j, "background", 1.0);
  p.contact_mean = require_positive(j, "contact_mean", 2e-3);
  p.contact_std = require_positive(j, "contact_std", 5e-4, true);
  if (j.contains("inclusions")) {
    for (const auto& ij : j.at("inclusions")) {
      Inclusion inc;
      const std::string shape = ij.at("shape").get<std::string>();
      inc.value = require_positive(ij, "value", 1.0);
      if (shape == "ball") {
        inc.shape = Inclusion::Shape::Ball;
        inc.center = parse_vector(ij.at("center"), "inclusion center");
        if (inc.center.size() != dim_hint)
          throw Error("config: inclusion center dimension mismatch");
        inc.radius = require_positive(ij, "radius", 0.0);
      } else if (shape == "cylinder") {
        inc.shape = Inclusion::Shape::Cylinder;
        inc.center = parse_vector(ij.at("center"), "inclusion center");
        inc.radius = require_positive(ij, "radius", 0.0);
        inc.zmin = ij.at("zmin").get<double>();
        inc.zmax = ij.at("zmax").get<double>();
        if (!(inc.zmax > inc.zmin))
          throw Error("config: cylinder inclusion zmax <= zmin");
      } else if (shape == "box") {
        inc.shape = Inclusion::Shape::Box;
        inc.box_min = parse_vector(ij.at("min"), "inclusion min");
        inc.box_max = parse_vector(ij.at("max"), "inclusion max");
        if (inc.box_min.size() != dim_hint || inc.box_max.size() != dim_hint)
          throw Error("config: inclusion box dimension mismatch");
      } else {
        throw Error("config: unknown inclusion shape '" + shape + "'");
      }
      p.inclusions.push_back(std::move(inc));
    }
  }
  return p;
}

std::string phantom_id(const Phantom& p) {
  std::ostringstream ss;
  ss << p.background << '|' << p.contact_mean << '|' << p.contact_std;
  for (const auto& inc : p.inclusions) {
    ss << '|' << static_cast<int>(inc.shape) << ':' << inc.value << ':'
       << inc.radius << ':' << inc.zmin << ':' << inc.zmax;
    for (Eigen::Index i = 0; i < inc.center.size(); ++i) ss << ',' << inc.center[i];
    for (Eigen::Index i = 0; i < inc.box_min.size(); ++i) ss << ',' << inc.box_min[i];
    for (Eigen::Index i = 0; i < inc.box_max.size(); ++i) ss << ',' << inc.box_max[i];
  }
  return hex_id(fnv1a(ss.str()));
}

std::uint64_t hash_config_json(const json& j) {
  return fnv1a(j.dump());  // nlohmann objects serialize with sorted keys
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  if (j.contains("mesh")) {
    const auto& m = j.at("mesh");
    if (m.contains("reconstruction"))
      c.mesh_reconstruction = m.at("reconstruction").get<std::string>();
    if (m.contains("simulation"))
      c.mesh_simulation = m.at("simulation").get<std::string>();
  }

  if (j.contains("electrodes")) c.electrodes = parse_electrodes(j.at("electrodes"));

  if (j.contains("patterns")) {
    const auto& p = j.at("patterns");
    const std::string type = p.value("type", "basis");
    if (type == "basis") {
      c.patterns.kind = PatternSpec::Kind::Basis;
    } else if (type == "pairs") {
      c.patterns.kind = PatternSpec::Kind::Pairs;
    } else if (type == "explicit") {
      c.patterns.kind = PatternSpec::Kind::Explicit;
      const auto& rows = p.at("matrix");
      if (!rows.is_array() || rows.empty())
        throw Error("config: explicit pattern matrix must be a 2D array");
      const std::size_t M = rows.size();
      const std::size_t L = rows[0].size();
      c.patterns.matrix.resize(static_cast<Eigen::Index>(M),
                               static_cast<Eigen::Index>(L));
      for (std::size_t r = 0; r < M; ++r) {
        if (rows[r].size() != L)
          throw Error("config: ragged pattern matrix");
        for (std::size_t l = 0; l < L; ++l)
          c.patterns.matrix(static_cast<Eigen::Index>(r),
                            static_cast<Eigen::Index>(l)) =
              rows[r][l].get<double>();
      }
    } else {
      throw Error("config: unknown pattern type '" + type + "'");
    }
  }

  if (j.contains("prior")) {
    const auto& p = j.at("prior");
    c.sigma0 = require_positive(p, "sigma0", c.sigma0);
    c.zeta0 = require_positive(p, "zeta0", c.zeta0);
    c.omega = require_positive(p, "omega", c.omega, true);
    c.ell = require_positive(p, "ell", c.ell);
    c.eta = require_positive(p, "eta", c.eta, true);
    c.draws = p.value("draws", c.draws);
    c.basis_dim = p.value("basis_dim", c.basis_dim);
    c.count_columns = p.value("count_columns", false);
    c.oversampling = p.value("oversampling", c.oversampling);
    c.power_iters = p.value("power_iters", c.power_iters);
    c.lowrank_covariance = p.value("lowrank_covariance", false);
    if (c.draws < 1) throw Error("config: 'draws' must be >= 1");
    if (c.basis_dim < 1) throw Error("config: 'basis_dim' must be >= 1");
  }

  if (j.contains("tv")) {
    const auto& p = j.at("tv");
    c.T = require_positive(p, "T", c.T);
    c.delta = require_positive(p, "delta", c.delta);
  }

  if (j.contains("noise")) {
    const auto& p = j.at("noise");
    c.varsigma = require_positive(p, "varsigma", c.varsigma, true);
    c.gamma_override = require_positive(p, "gamma", 0.0, true);
  }

  c.engine = j.value("engine", c.engine);
  if (c.engine != "full" && c.engine != "reduced")
    throw Error("config: 'engine' must be \"full\" or \"reduced\"");
  c.basis_file = j.value("basis_file", std::string());

  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    c.seeds.simulate = s.value("simulate", c.seeds.simulate);
    c.seeds.snapshots = s.value("snapshots", c.seeds.snapshots);
    c.seeds.pod = s.value("pod", c.seeds.pod);
  }

  if (j.contains("caps")) {
    const auto& p = j.at("caps");
    c.max_outer = p.value("max_outer", c.max_outer);
    c.max_inner = p.value("max_inner", c.max_inner);
    if (c.max_outer < 1 || c.max_inner < 1)
      throw Error("config: iteration caps must be >= 1");
  }
  c.morozov_scale = j.value("morozov_scale", 1.0);
  if (!(c.morozov_scale > 0)) throw Error("config: morozov_scale must be positive");

  if (j.contains("phantom")) c.phantom = parse_phantom(j.at("phantom"));
  c.write_vtk = j.value("write_vtk", false);

  c.config_hash = hash_config_json(j);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config: JSON parse failure in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

}  // namespace eit
