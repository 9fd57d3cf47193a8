// eitk-meshgen: structured demo meshes in the toolkit's text format.
// Real applications supply their own meshes; this covers the bundled
// examples and quick experiments.

#include <CLI11.hpp>
#include <iostream>

#include "eit/common.hpp"
#include "eit/meshgen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"structured mesh generator (cylinder, cube, rect2d)"};

  std::string shape = "cylinder", out = "mesh.txt";
  int n1 = 8, n2 = 8, n3 = 8;
  double radius = 1.0, height = 1.0, sx = 1.0, sy = 1.0, sz = 1.0;

  app.add_option("--shape", shape)->check(CLI::IsMember({"cylinder", "cube", "rect2d"}));
  app.add_option("--out", out);
  app.add_option("--n1", n1, "rings / x cells");
  app.add_option("--n2", n2, "z layers / y cells");
  app.add_option("--n3", n3, "z cells (cube only)");
  app.add_option("--radius", radius);
  app.add_option("--height", height);
  app.add_option("--sx", sx);
  app.add_option("--sy", sy);
  app.add_option("--sz", sz);

  CLI11_PARSE(app, argc, argv);

  try {
    eit::Mesh mesh;
    if (shape == "cylinder")
      mesh = eit::make_cylinder(n1, n2, radius, height);
    else if (shape == "cube")
      mesh = eit::make_cube(n1, n2, n3, sx, sy, sz);
    else
      mesh = eit::make_rect2d(n1, n2, sx, sy);
    eit::save_mesh(mesh, out);
    std::cout << "wrote " << out << ": dim=" << mesh.dim
              << " nodes=" << mesh.node_count()
              << " elements=" << mesh.element_count()
              << " boundary_facets=" << mesh.facet_count() << "\n";
  } catch (const eit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
