#include "eit/simulator.hpp"

#include <cmath>

#include "eit/common.hpp"
#include "eit/rng.hpp"

namespace eit {

bool Inclusion::contains(const Eigen::VectorXd& x) const {
  switch (shape) {
    case Shape::Ball:
      return (x - center).norm() <= radius;
    case Shape::Cylinder: {
      const double dx = x[0] - center[0];
      const double dy = x[1] - center[1];
      const double z = x[x.size() - 1];
      return std::hypot(dx, dy) <= radius && z >= zmin && z <= zmax;
    }
    case Shape::Box:
      for (Eigen::Index c = 0; c < x.size(); ++c)
        if (x[c] < box_min[c] || x[c] > box_max[c]) return false;
      return true;
  }
  return false;
}

Eigen::VectorXd rasterize_phantom(const Mesh& mesh, const Phantom& phantom) {
  if (!(phantom.background > 0))
    throw Error("phantom: background conductivity must be positive");
  for (const auto& inc : phantom.inclusions)
    if (!(inc.value > 0))
      throw Error("phantom: inclusion conductivity must be positive");

  Eigen::VectorXd sigma =
      Eigen::VectorXd::Constant(mesh.node_count(), phantom.background);
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i) {
    const Eigen::VectorXd x = mesh.nodes.row(i).transpose();
    for (const auto& inc : phantom.inclusions)
      if (inc.contains(x)) sigma[i] = inc.value;  // last descriptor wins
  }
  return sigma;
}

Eigen::VectorXd draw_contacts(const Phantom& phantom, int M,
                              std::uint64_t seed) {
  if (!(phantom.contact_mean > 0))
    throw Error("phantom: contact mean must be positive");
  NormalSampler sampler(seed);
  Eigen::VectorXd z(M);
  for (int m = 0; m < M; ++m) {
    double v = 0.0;
    do {
      v = phantom.contact_mean + phantom.contact_std * sampler();
    } while (v <= 0.0);
    z[m] = v;
  }
  return z;
}

MeasurementFrame apply_noise(const Eigen::VectorXd& clean,
                             const CurrentPatterns& patterns, double varsigma,
                             std::uint64_t seed) {
  if (varsigma < 0) throw Error("simulate: noise fraction must be >= 0");
  MeasurementFrame frame;
  frame.patterns = patterns.currents;
  frame.M = static_cast<int>(patterns.currents.rows());
  frame.L = static_cast<int>(patterns.count());
  frame.varsigma = varsigma;
  frame.seed = seed;
  frame.gamma = varsigma * (clean.maxCoeff() - clean.minCoeff());
  if (frame.gamma > 0) {
    frame.voltages =
        clean + frame.gamma * standard_normal_vector(clean.size(), seed);
  } else {
    frame.voltages = clean;
  }
  return frame;
}

MeasurementFrame simulate(const AffineSystem& sys, const Phantom& phantom,
                          const CurrentPatterns& patterns, double varsigma,
                          std::uint64_t seed) {
  const Eigen::VectorXd sigma = rasterize_phantom(*sys.mesh, phantom);
  const Eigen::VectorXd z = draw_contacts(phantom, sys.M, split_seed(seed, 0));
  const ForwardSolution fs = solve_forward(sys, sigma, z, patterns);
  MeasurementFrame frame =
      apply_noise(fs.Uvec, patterns, varsigma, split_seed(seed, 1));
  frame.seed = seed;
  frame.mesh_id = sys.mesh->content_id;
  return frame;
}

}  // namespace eit
