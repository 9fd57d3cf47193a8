#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "eit/common.hpp"
#include "eit/inversion.hpp"
#include "eit/simulator.hpp"
#include "eit/tv.hpp"
#include "support.hpp"

using namespace eit;

namespace {

struct Setup {
  std::shared_ptr<const Mesh> mesh;
  ElectrodeLayout layout;
  AffineSystem sys;
  CurrentPatterns patterns;
  FreeNodeMap map;
  Eigen::VectorXd sigma0, z0;
  ProjectionOperator P;

  explicit Setup(int nr = 4, int nz = 7) {
    mesh = std::make_shared<Mesh>(make_cylinder(nr, nz));
    layout = assign_electrodes(*mesh, test::sixteen_side_electrodes(1, 1, 0.2));
    patterns = pair_patterns(layout.M);
    sys = assemble_affine(mesh, layout, build_current_basis(layout.M));
    map = make_free_node_map(*mesh, layout);
    sigma0 = Eigen::VectorXd::Constant(sys.N, 0.93);
    z0 = Eigen::VectorXd::Constant(layout.M, 0.007);
    const ForwardSolution fs = solve_forward(sys, sigma0, z0, patterns);
    P = build_projection(jacobian_z(sys, fs, z0));
  }
};

}  // namespace

TEST_CASE("noise-free data at the initial guess is a fixed point") {
  Setup s;
  // same-mesh, noise-free data; tight Morozov level
  const ForwardSolution truth = solve_forward(s.sys, s.sigma0, s.z0, s.patterns);
  NoiseModel noise;
  noise.gamma = 1e-3;
  noise.L = static_cast<int>(s.patterns.count());
  noise.M = s.layout.M;
  noise.morozov_scale = 1e-8;

  FullEngine engine(s.sys, s.patterns);
  InversionConfig cfg;
  const ReconstructionResult res =
      outer_iterate(cfg, engine, s.sys, s.map, s.P, noise, truth.Uvec,
                    s.sigma0, s.z0, nullptr);
  CHECK(res.converged);
  CHECK(res.outer_iterations <= 2);
  CHECK((res.sigma - s.sigma0).norm() <= 1e-6 * s.sigma0.norm());
}

TEST_CASE("clamping and electrode pinning hold on a noisy run") {
  Setup s;
  Phantom ph;
  ph.background = 1.0;
  ph.contact_mean = 2e-3;
  ph.contact_std = 5e-4;
  Inclusion inc;
  inc.shape = Inclusion::Shape::Cylinder;
  inc.value = 0.5;
  inc.center = Eigen::Vector2d(-0.4, 0.0);
  inc.radius = 0.4;
  inc.zmin = 0.0;
  inc.zmax = 0.6;
  ph.inclusions = {inc};

  auto fine = std::make_shared<Mesh>(make_cylinder(8, 8));
  auto lay_f = assign_electrodes(*fine, test::sixteen_side_electrodes(1, 1, 0.2));
  auto sys_f = assemble_affine(fine, lay_f, build_current_basis(16));
  const MeasurementFrame frame = simulate(sys_f, ph, s.patterns, 0.004, 11);

  NoiseModel noise{frame.gamma, frame.L, frame.M, 1.0};
  FullEngine engine(s.sys, s.patterns);
  InversionConfig cfg;
  std::ostringstream log;
  const ReconstructionResult res =
      outer_iterate(cfg, engine, s.sys, s.map, s.P, noise, frame.voltages,
                    s.sigma0, s.z0, &log);

  CHECK(res.sigma.minCoeff() >= cfg.delta);
  for (int node : s.layout.electrode_nodes)
    CHECK(res.sigma[node] == s.sigma0[node]);

  // one machine-readable JSON object per iteration line
  std::string line;
  int lines = 0;
  std::istringstream in(log.str());
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("iter"));
    CHECK(j.contains("inner"));
    CHECK(j.contains("discrepancy"));
    CHECK(j.contains("phi_p"));
    CHECK(j.contains("wall_s"));
    ++lines;
  }
  CHECK(lines == res.outer_iterations);

  // Morozov discipline on the converged history
  if (res.converged) {
    CHECK(res.final_discrepancy <= res.epsilon);
    if (res.outer_iterations >= 2)
      CHECK(res.history[static_cast<std::size_t>(res.outer_iterations - 2)]
                .discrepancy > res.epsilon);
    else
      CHECK(res.initial_discrepancy > res.epsilon);
  }
}

TEST_CASE("objective_eval closed forms") {
  Setup s;
  const ForwardSolution fs = solve_forward(s.sys, s.sigma0, s.z0, s.patterns);
  NoiseModel noise{0.02, static_cast<int>(s.patterns.count()), s.layout.M, 1.0};
  const double T = 1e-6;

  // V = U and constant sigma: only the TV volume term survives
  const double phi =
      objective_eval(*s.mesh, s.P, noise, fs.Uvec, fs.Uvec, s.sigma0, 1.0, T);
  CHECK(phi == doctest::Approx(T * s.mesh->total_volume()).epsilon(1e-10));

  // alpha = 0: pure half squared whitened projected misfit
  Eigen::VectorXd V = fs.Uvec;
  V[5] += 0.1;
  V[17] -= 0.03;
  const double fit =
      objective_eval(*s.mesh, s.P, noise, V, fs.Uvec, s.sigma0, 0.0, T);
  const double want =
      0.5 * s.P.apply_whitened(V - fs.Uvec, noise.gamma).squaredNorm();
  CHECK(fit == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("divergence guard predicate") {
  CHECK(!should_abort_divergence({1.0, 2.0}, 5));
  CHECK(!should_abort_divergence({5, 4, 3, 2, 1, 0.5}, 5));
  CHECK(should_abort_divergence({1, 2, 3, 4, 5, 6}, 5));
  CHECK(!should_abort_divergence({1, 2, 3, 2, 4, 5}, 5));  // growth interrupted
  CHECK(should_abort_divergence({9, 1, 2, 3, 4, 5, 6}, 5));
}

TEST_CASE("input validation") {
  Setup s;
  NoiseModel noise{0.01, static_cast<int>(s.patterns.count()), s.layout.M, 1.0};
  FullEngine engine(s.sys, s.patterns);
  InversionConfig cfg;
  const Eigen::VectorXd V = Eigen::VectorXd::Zero(s.P.dimension());

  Eigen::VectorXd low = s.sigma0;
  low[3] = 0.5 * cfg.delta;  // below the clamping level
  CHECK_THROWS_AS(outer_iterate(cfg, engine, s.sys, s.map, s.P, noise, V, low,
                                s.z0, nullptr),
                  Error);

  NoiseModel bad = noise;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(outer_iterate(cfg, engine, s.sys, s.map, s.P, bad, V,
                                s.sigma0, s.z0, nullptr),
                  Error);
}
