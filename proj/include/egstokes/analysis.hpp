#pragma once

#include <vector>

#include "egstokes/assembly.hpp"
#include "egstokes/fe_space.hpp"
#include "egstokes/mesh.hpp"
#include "egstokes/problems.hpp"

namespace egstokes {

/// ||u - u_h||_E = (||grad(u - u_h)||^2 + rho ||h_e^-1/2 [[u - u_h]]||^2)^1/2.
/// Interior jumps of u vanish; on the boundary the trace of u is `g`.
double energy_error(const SimplicialMesh& mesh, const DofLayout& layout, const TensorField& grad_u,
                    const VectorField& g, const Vec& coefficients, double rho);

struct PressureErrors {
  double l2 = 0.0;         // ||p - p_h||_0
  double auxiliary = 0.0;  // ||P_0 p - p_h||_0
};

/// Both norms with p shifted by `p_mean` so it has zero mean like p_h.
PressureErrors pressure_errors(const SimplicialMesh& mesh, const ScalarField& p, double p_mean, const Vec& p_h);

/// Elementwise mean of p (degree-5 quadrature).
Vec pressure_projection(const SimplicialMesh& mesh, const ScalarField& p);

/// rate_i = log(e_{i-1}/e_i) / log(h_{i-1}/h_i); one entry per consecutive pair.
/// Throws std::invalid_argument for nonpositive errors or a non-decreasing h.
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& h);

struct DivergenceReport {
  Vec per_element;
  double max_abs = 0.0;
};

DivergenceReport divergence_report(const ReconstructedField& field, const SimplicialMesh& mesh);

struct ErrorReport {
  double h = 0.0;
  double nu = 0.0;
  std::string method;
  double velocity_energy = 0.0;
  double pressure_l2 = 0.0;
  double pressure_auxiliary = 0.0;
  double max_divergence = 0.0;
};

/// All error quantities for a full (U^D, U^C, P) solution of `problem`.
ErrorReport compute_errors(const SimplicialMesh& mesh, const DofLayout& layout, const ProblemSpec& problem,
                           const Vec& solution, double rho);

}  // namespace egstokes
