#pragma once

#include <string>
#include <vector>

#include "egstokes/assembly.hpp"
#include "egstokes/fe_space.hpp"
#include "egstokes/mesh.hpp"

namespace egstokes {

enum class Method { st, pr, ppr, cpr };

/// "st", "pr", "ppr", "cpr" (case-insensitive, optional "-eg" suffix).
Method parse_method(const std::string& name);
std::string method_name(Method m);  // "ST-EG", ...
std::string method_key(Method m);   // "st", ...

/// Assembled blocks after strong elimination of the boundary continuous DoFs.
///
/// Eliminated rows and columns are zero except for the diagonal, which keeps
/// its assembled value; the matching right-hand side entry is A(b,b) g_b.
struct BlockSystem {
  int dim = 2;
  double nu = 1.0;
  double rho = 10.0;
  SpMat A_DD, A_DC, A_CD, A_CC;
  SpMat G_D, G_C;
  SpMat M_p;
  Vec f_D_plain, f_D_reconstructed;  // enrichment RHS for (f,v) and (f,Rv)
  Vec f_C;
  Vec g_P;  // continuity RHS in the [A G; G^T 0] convention, mean-free
  std::vector<Index> boundary_dofs;  // positions within U^C
  Vec boundary_values;
};

/// Assembles every block and both load modes in one pass.
BlockSystem assemble_block_system(const SimplicialMesh& mesh, const DofLayout& layout, const VectorField& f,
                                  const VectorField& g, double nu, double rho);

/// Saddle-point system of one method.
///
/// Full methods: unknowns (U^D, U^C, P), operator [A_u G; G^T 0].
/// CPR-EG: unknowns (U^C, P), operator [A^E_u G^E; G^E^T -A^E_p].
struct StokesSystem {
  Method method = Method::st;
  Index n_velocity = 0;
  Index n_pressure = 0;
  SpMat A_u;    // velocity block
  SpMat G;      // velocity x pressure coupling
  SpMat C;      // pressure block: zero or -A^E_p
  SpMat matrix;  // assembled 2x2 block operator
  Vec rhs;
  SpMat M_p;
  double nu = 1.0;
  std::vector<Index> fixed_velocity;  // strongly eliminated rows within the velocity block
  std::vector<double> element_volumes;

  // Elimination data for recovering U^D after a CPR-EG solve.
  Vec D_inv;
  SpMat A_DC;
  SpMat G_D;
  Vec f_D;
  Index n_enrichment = 0;
};

StokesSystem build_system(Method method, const BlockSystem& blocks, std::span<const double> element_volumes);

struct CondensedSystem {
  SpMat A_u;   // A_CC - A_CD D^-1 A_DC
  SpMat G;     // G_C - A_CD D^-1 G_D
  SpMat A_p;   // G_D^T D^-1 G_D
  Vec f_u;
  Vec f_p;
  Vec D_inv;
};

/// Static condensation of the perturbed system. Throws std::domain_error on a
/// nonpositive D_DD entry.
CondensedSystem condense(const SpMat& D_DD, const SpMat& A_DC, const SpMat& A_CD, const SpMat& A_CC, const SpMat& G_D,
                         const SpMat& G_C, const Vec& f_D, const Vec& f_C, const Vec& g_P);

/// U^D = D^-1 (f_D - A_DC U^C - G_D P).
Vec recover_enrichment(const Vec& U_C, const Vec& P, const Vec& D_inv, const SpMat& A_DC, const SpMat& G_D,
                       const Vec& f_D);

/// Maps a solution of `system` to the full (U^D, U^C, P) vector.
Vec expand_solution(const StokesSystem& system, const Vec& x);

/// p <- p - (sum_K |K| p_K) / |Omega|, in place on the trailing pressure block.
void project_pressure_mean(Vec& x, Index pressure_offset, std::span<const double> element_volumes);

/// Direct sparse LU with the last pressure DoF pinned, then mean projection.
Vec solve_direct(const StokesSystem& system);

/// Everything needed to run one method on one mesh.
struct Discretization {
  SimplicialMesh mesh;
  DofLayout layout;
  BlockSystem blocks;
};

Discretization discretize(SimplicialMesh mesh, const VectorField& f, const VectorField& g, double nu, double rho);

}  // namespace egstokes
