#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "eit/common.hpp"
#include "eit/config.hpp"
#include "eit/io.hpp"
#include "support.hpp"

using namespace eit;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

MeasurementFrame tiny_frame() {
  MeasurementFrame f;
  f.M = 4;
  f.L = 3;
  f.patterns = pair_patterns(4).currents;
  f.voltages = Eigen::VectorXd::LinSpaced(12, -0.6, 0.5);
  f.gamma = 0.0123;
  f.varsigma = 0.004;
  f.seed = 77;
  f.mesh_id = 0xabcdef;
  f.phantom_id = "deadbeef";
  return f;
}

}  // namespace

TEST_CASE("measurement file round trip with ground normalization") {
  const MeasurementFrame f = tiny_frame();
  const std::string path = "meas_test.json";
  save_measurement(f, 0x1234, "some/mesh.txt", path);

  const LoadedMeasurement lm = load_measurement(path);
  CHECK(lm.frame.M == 4);
  CHECK(lm.frame.L == 3);
  CHECK(lm.frame.gamma == f.gamma);
  CHECK(lm.frame.seed == 77);
  CHECK(lm.frame.mesh_id == 0xabcdef);
  CHECK(lm.mesh_path == "some/mesh.txt");
  CHECK(lm.config_hash == 0x1234);
  CHECK((lm.frame.patterns - f.patterns).cwiseAbs().maxCoeff() == 0.0);

  // ingestion projects every pattern block onto the zero-sum subspace
  for (int l = 0; l < 3; ++l) {
    CHECK(std::abs(lm.frame.voltages.segment(4 * l, 4).sum()) < 1e-12);
    // and preserves within-block differences
    const Eigen::Vector4d orig = f.voltages.segment(4 * l, 4);
    const Eigen::Vector4d got = lm.frame.voltages.segment(4 * l, 4);
    CHECK(((orig.array() - orig.mean()) - got.array()).abs().maxCoeff() <
          1e-14);
  }
  std::remove(path.c_str());
}

TEST_CASE("measurement writes are byte-identical across reruns") {
  const MeasurementFrame f = tiny_frame();
  save_measurement(f, 0x99, "m.txt", "meas_a.json");
  save_measurement(f, 0x99, "m.txt", "meas_b.json");
  CHECK(slurp("meas_a.json") == slurp("meas_b.json"));
  std::remove("meas_a.json");
  std::remove("meas_b.json");
}

TEST_CASE("result file round trip") {
  ReconstructionResult r;
  r.sigma = Eigen::VectorXd::LinSpaced(9, 0.5, 2.0);
  r.converged = true;
  r.outer_iterations = 2;
  r.epsilon = 15.49;
  r.initial_discrepancy = 80.5;
  r.final_discrepancy = 14.2;
  r.engine = "full";
  IterationRecord it;
  it.iteration = 1;
  it.inner_iterations = 7;
  it.inner_converged = true;
  it.discrepancy = 20.0;
  it.objective = 3.25;
  it.forward_seconds = 0.5;
  r.history = {it, it};
  r.history[1].iteration = 2;
  r.history[1].discrepancy = 14.2;

  const std::string path = "result_test.json";
  save_result(r, 0xfeed, 42, "mesh.txt", 0xbeef, path);
  const LoadedResult lr = load_result(path);
  CHECK(lr.result.converged);
  CHECK(lr.result.outer_iterations == 2);
  CHECK(lr.result.engine == "full");
  CHECK(lr.result.final_discrepancy == 14.2);
  CHECK(lr.mesh_id == 0xbeef);
  CHECK(lr.config_hash == 0xfeed);
  CHECK((lr.result.sigma - r.sigma).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lr.result.history.size() == 2);
  CHECK(lr.result.history[0].inner_iterations == 7);
  CHECK(lr.result.history[0].forward_seconds == 0.5);
  std::remove(path.c_str());
  std::remove((path + ".sigma.txt").c_str());
}

TEST_CASE("vtk writer emits a well-formed legacy unstructured grid") {
  const Mesh m = make_reference_tet();
  const Eigen::VectorXd field = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
  const std::string path = "field_test.vtk";
  write_vtk(m, field, path);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# vtk DataFile Version 3.0");
  std::getline(in, line);  // title
  std::getline(in, line);
  CHECK(line == "ASCII");
  std::getline(in, line);
  CHECK(line == "DATASET UNSTRUCTURED_GRID");
  std::getline(in, line);
  CHECK(line == "POINTS 4 double");
  const std::string body = slurp(path);
  CHECK(body.find("CELLS 1 5") != std::string::npos);
  CHECK(body.find("CELL_TYPES 1") != std::string::npos);
  CHECK(body.find("SCALARS conductivity double 1") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("compare: identical results differ by zero") {
  const Mesh m = make_cylinder(3, 3);
  save_mesh(m, "cmp_mesh.txt");

  ReconstructionResult r;
  r.sigma = Eigen::VectorXd::Constant(m.node_count(), 1.1);
  r.converged = true;
  r.outer_iterations = 1;
  r.engine = "full";
  r.epsilon = 1;
  r.final_discrepancy = 0.5;
  IterationRecord it;
  it.iteration = 1;
  it.forward_seconds = 0.25;
  it.jacobian_seconds = 0.1;
  r.history = {it};

  save_result(r, 1, 2, "cmp_mesh.txt", m.content_id, "cmp_a.json");
  save_result(r, 1, 2, "cmp_mesh.txt", m.content_id, "cmp_b.json");
  const CompareReport rep =
      compare_results(load_result("cmp_a.json"), load_result("cmp_b.json"));
  CHECK(rep.relative_l2 == 0.0);
  CHECK(rep.forward_plus_jacobian_ratio == doctest::Approx(1.0));

  // mismatched mesh ids are rejected
  save_result(r, 1, 2, "cmp_mesh.txt", m.content_id ^ 1, "cmp_c.json");
  CHECK_THROWS_AS(
      compare_results(load_result("cmp_a.json"), load_result("cmp_c.json")),
      Error);
  for (const char* p : {"cmp_a.json", "cmp_b.json", "cmp_c.json", "cmp_mesh.txt"})
    std::remove(p);
  std::remove("cmp_a.json.sigma.txt");
  std::remove("cmp_b.json.sigma.txt");
  std::remove("cmp_c.json.sigma.txt");
}

TEST_CASE("config parsing and validation") {
  json good = {
      {"mesh", {{"reconstruction", "rec.txt"}, {"simulation", "sim.txt"}}},
      {"electrodes",
       json::array({{{"type", "disk"}, {"center", {1, 0, 0.3}}, {"radius", 0.15}},
                    {{"type", "disk"}, {"center", {0, 1, 0.3}}, {"radius", 0.15}}})},
      {"patterns", {{"type", "pairs"}}},
      {"prior",
       {{"sigma0", 0.93}, {"zeta0", 0.007}, {"omega", 0.5}, {"ell", 1.0},
        {"eta", 5e-4}, {"draws", 200}, {"basis_dim", 100}}},
      {"tv", {{"T", 1e-6}, {"delta", 1e-2}}},
      {"noise", {{"varsigma", 0.004}}},
      {"engine", "full"},
      {"seeds", {{"simulate", 7}, {"snapshots", 8}, {"pod", 9}}},
      {"caps", {{"max_outer", 50}, {"max_inner", 200}}}};

  const RunConfig c = parse_config(good);
  CHECK(c.mesh_reconstruction == "rec.txt");
  CHECK(c.sigma0 == 0.93);
  CHECK(c.draws == 200);
  CHECK(c.patterns.kind == PatternSpec::Kind::Pairs);
  CHECK(c.seeds.snapshots == 8);
  CHECK(c.config_hash != 0);
  CHECK(c.config_hash == hash_config_json(good));

  // equal documents hash equally regardless of insertion order
  json reordered = json::parse(good.dump());
  CHECK(hash_config_json(reordered) == c.config_hash);

  json bad = good;
  bad["engine"] = "warp";
  CHECK_THROWS_AS(parse_config(bad), Error);
  bad = good;
  bad["prior"]["sigma0"] = -2.0;
  CHECK_THROWS_AS(parse_config(bad), Error);
  bad = good;
  bad["tv"]["T"] = 0.0;
  CHECK_THROWS_AS(parse_config(bad), Error);
  bad = good;
  bad["electrodes"] = json::array({bad["electrodes"][0]});  // only one
  CHECK_THROWS_AS(parse_config(bad), Error);
  bad = good;
  bad["patterns"] = {{"type", "explicit"},
                     {"matrix", json::array({json::array({1.0, 2.0}),
                                             json::array({1.0})})}};
  CHECK_THROWS_AS(parse_config(bad), Error);
}

TEST_CASE("phantom parsing and id stability") {
  json pj = {{"background", 1.0},
             {"contact_mean", 2e-3},
             {"contact_std", 5e-4},
             {"inclusions",
              json::array(
                  {{{"shape", "cylinder"}, {"value", 2.0}, {"center", {0.5, 0.0}},
                    {"radius", 0.4}, {"zmin", 0.4}, {"zmax", 1.0}},
                   {{"shape", "ball"}, {"value", 0.5},
                    {"center", {0, 0, 0.5}}, {"radius", 0.2}}})}};
  // dim hints differ per inclusion shape usage; parse with 3D hint fails on
  // the 2D cylinder center? -> cylinder centers are (x, y) pairs by contract
  json pj3 = pj;
  const Phantom p = parse_phantom(pj3);
  CHECK(p.inclusions.size() == 2);
  CHECK(phantom_id(p) == phantom_id(p));

  Phantom q = p;
  q.inclusions[0].value = 2.5;
  CHECK(phantom_id(q) != phantom_id(p));

  json bad = pj;
  bad["inclusions"][0]["zmax"] = 0.0;
  CHECK_THROWS_AS(parse_phantom(bad), Error);
}

#ifdef EITK_BIN
TEST_CASE("cli: validation failures exit with code 2") {
  const std::string bin = EITK_BIN;
  {
    std::ofstream out("bad_config.json");
    out << "{\"engine\": \"reduced\"}\n";  // no basis file, no mesh
  }
  const int rc =
      std::system((bin + " reconstruct --config bad_config.json --data nope.json"
                         " > /dev/null 2>&1")
                      .c_str());
  CHECK(WEXITSTATUS(rc) == 2);

  const int rc2 = std::system(
      (bin + " simulate --config missing_config.json > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc2) == 2);
  std::remove("bad_config.json");
}
#endif
