#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "eit/cem.hpp"

namespace eit {

struct Inclusion {
  enum class Shape { Ball, Cylinder, Box };
  Shape shape = Shape::Ball;
  double value = 1.0;

  Eigen::VectorXd center;  // Ball: d-dim; Cylinder: (x,y) of the axis
  double radius = 0.0;     // Ball and Cylinder
  double zmin = 0.0, zmax = 0.0;          // Cylinder extent
  Eigen::VectorXd box_min, box_max;       // Box corners

  bool contains(const Eigen::VectorXd& x) const;
};

struct Phantom {
  double background = 1.0;
  std::vector<Inclusion> inclusions;  // later entries win on overlap
  double contact_mean = 2e-3;
  double contact_std = 5e-4;
};

/// Nodal conductivity by point membership of the node coordinates.
Eigen::VectorXd rasterize_phantom(const Mesh& mesh, const Phantom& phantom);

/// Contact resistances from the phantom's normal spec, redrawing any
/// non-positive sample.
Eigen::VectorXd draw_contacts(const Phantom& phantom, int M,
                              std::uint64_t seed);

struct MeasurementFrame {
  Eigen::VectorXd voltages;  // length LM, pattern-major
  double gamma = 0.0;        // noise standard deviation actually used
  double varsigma = 0.0;
  Eigen::MatrixXd patterns;  // M x L
  int M = 0, L = 0;
  std::uint64_t seed = 0;
  std::uint64_t mesh_id = 0;
  std::string phantom_id;
};

/// Additive Gaussian noise at gamma = varsigma * (max - min) of the clean
/// voltages, seeded.
MeasurementFrame apply_noise(const Eigen::VectorXd& clean,
                             const CurrentPatterns& patterns, double varsigma,
                             std::uint64_t seed);

/// Forward solve on the (fine) mesh behind `sys` at the rasterized phantom
/// with freshly drawn contacts, plus noise.
MeasurementFrame simulate(const AffineSystem& sys, const Phantom& phantom,
                          const CurrentPatterns& patterns, double varsigma,
                          std::uint64_t seed);

}  // namespace eit
