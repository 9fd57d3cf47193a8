#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>

#include "eit/common.hpp"
#include "eit/rng.hpp"
#include "eit/simulator.hpp"
#include "support.hpp"

using namespace eit;

TEST_CASE("no inclusions rasterizes to the constant background") {
  const Mesh m = make_cylinder(4, 4);
  Phantom ph;
  ph.background = 0.7;
  const Eigen::VectorXd sigma = rasterize_phantom(m, ph);
  CHECK((sigma.array() == 0.7).all());
}

TEST_CASE("ball inclusion node count tracks the volume fraction") {
  const Mesh m = make_cylinder(10, 9);  // quasi-uniform, ~3300 nodes
  Phantom ph;
  Inclusion inc;
  inc.shape = Inclusion::Shape::Ball;
  inc.value = 2.0;
  inc.center = Eigen::Vector3d(0.0, 0.0, 0.5);
  inc.radius = 0.5;
  ph.inclusions = {inc};

  const Eigen::VectorXd sigma = rasterize_phantom(m, ph);
  const double count = (sigma.array() == 2.0).count();
  const double ratio =
      (4.0 / 3.0) * M_PI * std::pow(inc.radius, 3) / m.total_volume();
  CHECK(std::abs(count - ratio * m.node_count()) <=
        0.05 * ratio * m.node_count());
}

TEST_CASE("overlapping inclusions: the later descriptor wins") {
  const Mesh m = make_cylinder(4, 4);
  Phantom ph;
  Inclusion a;
  a.shape = Inclusion::Shape::Ball;
  a.value = 2.0;
  a.center = Eigen::Vector3d(0, 0, 0.5);
  a.radius = 0.5;
  Inclusion b = a;
  b.value = 3.0;
  b.radius = 0.3;
  ph.inclusions = {a, b};
  const Eigen::VectorXd sigma = rasterize_phantom(m, ph);
  for (Eigen::Index i = 0; i < m.node_count(); ++i) {
    const Eigen::VectorXd x = m.nodes.row(i).transpose();
    if (b.contains(x))
      CHECK(sigma[i] == 3.0);
    else if (a.contains(x))
      CHECK(sigma[i] == 2.0);
    else
      CHECK(sigma[i] == 1.0);
  }
}

TEST_CASE("box inclusion and validation") {
  const Mesh m = make_rect2d(4, 4);
  Phantom ph;
  Inclusion box;
  box.shape = Inclusion::Shape::Box;
  box.value = 5.0;
  box.box_min = Eigen::Vector2d(0.2, 0.2);
  box.box_max = Eigen::Vector2d(0.6, 0.7);
  ph.inclusions = {box};
  const Eigen::VectorXd sigma = rasterize_phantom(m, ph);
  CHECK((sigma.array() == 5.0).any());
  CHECK((sigma.array() == 1.0).any());

  ph.inclusions[0].value = -1.0;
  CHECK_THROWS_AS(rasterize_phantom(m, ph), Error);
  ph.inclusions.clear();
  ph.background = 0.0;
  CHECK_THROWS_AS(rasterize_phantom(m, ph), Error);
}

namespace {

struct SimSetup {
  std::shared_ptr<const Mesh> mesh;
  ElectrodeLayout layout;
  AffineSystem sys;
  CurrentPatterns patterns;
  Phantom phantom;

  SimSetup() {
    mesh = std::make_shared<Mesh>(make_cylinder(5, 5));
    layout = assign_electrodes(*mesh, test::sixteen_side_electrodes());
    patterns = pair_patterns(layout.M);
    sys = assemble_affine(mesh, layout, build_current_basis(layout.M));
    phantom.background = 1.0;
    phantom.contact_mean = 2e-3;
    phantom.contact_std = 5e-4;
    Inclusion inc;
    inc.shape = Inclusion::Shape::Cylinder;
    inc.value = 2.0;
    inc.center = Eigen::Vector2d(0.4, 0.0);
    inc.radius = 0.3;
    inc.zmin = 0.4;
    inc.zmax = 1.0;
    phantom.inclusions = {inc};
  }
};

}  // namespace

TEST_CASE("zero noise fraction returns the clean voltages") {
  const SimSetup s;
  const MeasurementFrame frame = simulate(s.sys, s.phantom, s.patterns, 0.0, 9);
  CHECK(frame.gamma == 0.0);
  const Eigen::VectorXd sigma = rasterize_phantom(*s.mesh, s.phantom);
  const Eigen::VectorXd z =
      draw_contacts(s.phantom, s.layout.M, split_seed(9, 0));
  const ForwardSolution fs = solve_forward(s.sys, sigma, z, s.patterns);
  CHECK((frame.voltages - fs.Uvec).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise level follows the voltage spread") {
  const SimSetup s;
  const MeasurementFrame frame =
      simulate(s.sys, s.phantom, s.patterns, 0.004, 42);
  CHECK(frame.gamma > 0);
  CHECK(frame.varsigma == 0.004);
  CHECK(frame.mesh_id == s.mesh->content_id);

  // recompute the clean solve to verify gamma = varsigma * (max-min)
  const Eigen::VectorXd sigma = rasterize_phantom(*s.mesh, s.phantom);
  const Eigen::VectorXd z =
      draw_contacts(s.phantom, s.layout.M, split_seed(42, 0));
  const ForwardSolution fs = solve_forward(s.sys, sigma, z, s.patterns);
  CHECK(frame.gamma == doctest::Approx(0.004 * (fs.Uvec.maxCoeff() -
                                                fs.Uvec.minCoeff()))
                           .epsilon(1e-14));
}

TEST_CASE("empirical noise statistics match gamma") {
  // fixed clean vector; apply_noise across many seeds
  Eigen::VectorXd clean = Eigen::VectorXd::LinSpaced(240, -1.0, 1.0);
  CurrentPatterns pats = pair_patterns(16);
  const double varsigma = 0.004;
  const double gamma = varsigma * 2.0;

  double ss = 0.0;
  long n = 0;
  for (int seed = 0; seed < 1000; ++seed) {
    const MeasurementFrame f = apply_noise(clean, pats, varsigma, seed);
    ss += (f.voltages - clean).squaredNorm();
    n += clean.size();
  }
  const double std_hat = std::sqrt(ss / n);
  CHECK(std::abs(std_hat - gamma) <= 0.05 * gamma);
}

TEST_CASE("noise is seed-deterministic and decorrelated across seeds") {
  Eigen::VectorXd clean = Eigen::VectorXd::Zero(240);
  CurrentPatterns pats = pair_patterns(16);
  const MeasurementFrame a = apply_noise(clean, pats, 0.01, 7);
  const MeasurementFrame b = apply_noise(clean, pats, 0.01, 7);
  const MeasurementFrame c = apply_noise(clean, pats, 0.01, 8);
  CHECK((a.voltages - b.voltages).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::VectorXd u = a.voltages.array() - a.voltages.mean();
  const Eigen::VectorXd v = c.voltages.array() - c.voltages.mean();
  const double corr = u.dot(v) / (u.norm() * v.norm());
  CHECK(std::abs(corr) < 0.1);
}

TEST_CASE("contact draws reject non-positive values") {
  Phantom ph;
  ph.contact_mean = 1e-4;
  ph.contact_std = 5e-3;  // wide: rejection must kick in
  const Eigen::VectorXd z = draw_contacts(ph, 64, 5);
  CHECK((z.array() > 0).all());
}
