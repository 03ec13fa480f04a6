#pragma once

#include <functional>
#include <string>
#include <vector>

#include "egstokes/assembly.hpp"
#include "egstokes/mesh.hpp"

namespace egstokes {

using TensorField = std::function<Mat3(const Vec3&)>;

/// Manufactured Stokes problem with f = -nu lap u + grad p and g = u on the boundary.
struct ProblemSpec {
  std::string id;
  int dim = 2;
  double nu = 1.0;
  double rho = 10.0;  // default penalty
  double domain_measure = 1.0;
  double pressure_mean = 0.0;  // (1/|Omega|) int p
  bool homogeneous = false;    // g vanishes on the boundary
  std::function<SimplicialMesh(int)> build_mesh;
  VectorField u;
  TensorField grad_u;  // row i = gradient of u_i
  VectorField laplacian_u;
  ScalarField p;
  VectorField grad_p;
  VectorField f;
  VectorField g;
};

/// Known ids: vortex2d, cube3d, lshape3d. Throws std::invalid_argument otherwise.
ProblemSpec get_problem(const std::string& id, double nu);

std::vector<std::string> problem_ids();

}  // namespace egstokes
