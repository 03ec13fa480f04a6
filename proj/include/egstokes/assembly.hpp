#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "egstokes/fe_space.hpp"
#include "egstokes/mesh.hpp"

namespace egstokes {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using VectorField = std::function<Vec3(const Vec3&)>;
using ScalarField = std::function<double(const Vec3&)>;

/// The four velocity blocks of a(.,.) in the (D, C) split.
struct VelocityBlocks {
  SpMat DD, DC, CD, CC;
};

/// Pressure coupling blocks, stored velocity x pressure.
///
/// G(i, K) = -b(psi_i, chi_K), so the saddle matrix reads [A G; G^T 0].
struct CouplingBlocks {
  SpMat D, C;
};

/// a(v,w) = nu[(grad v, grad w) - <{grad v}n,[[w]]> - <{grad w}n,[[v]]> + rho <h^-1 [[v]],[[w]]>]
/// over all elements and all facets, boundary facets included.
VelocityBlocks assemble_a(const SimplicialMesh& mesh, const DofLayout& layout, double nu, double rho);

/// Coupling from b(w,q) = (div w, q) - <[[w]].n, {q}>.
CouplingBlocks assemble_b(const SimplicialMesh& mesh, const DofLayout& layout);

/// Coupling from (div R w, q). Agrees with assemble_b on every row whose
/// continuous basis function vanishes on the boundary.
CouplingBlocks assemble_b_reconstructed(const SimplicialMesh& mesh, const DofLayout& layout);

/// Diagonal pressure mass matrix, entry |K|.
SpMat assemble_pressure_mass(const SimplicialMesh& mesh, const DofLayout& layout);

/// R v: continuous part untouched, enrichment part mapped to RT0 through the
/// facet fluxes c_e = int_e {v^D}.n_e (zero on boundary facets).
class ReconstructedField {
 public:
  ReconstructedField(const SimplicialMesh& mesh, const DofLayout& layout, Vec coefficients);

  /// Flux of R v^D through facet f along its normal n_e.
  [[nodiscard]] double facet_flux(Index f) const { return flux_[f]; }
  [[nodiscard]] const Vec& facet_fluxes() const { return flux_; }

  /// R v restricted to element k at x.
  [[nodiscard]] Vec3 value(Index k, const Vec3& x) const;
  /// RT0 part only.
  [[nodiscard]] Vec3 rt0_value(Index k, const Vec3& x) const;
  /// Constant divergence of R v on element k.
  [[nodiscard]] double divergence(Index k) const;
  [[nodiscard]] Vec divergences() const;

 private:
  const SimplicialMesh* mesh_;
  const DofLayout* layout_;
  Vec coefficients_;
  Vec flux_;
};

ReconstructedField reconstruct(const SimplicialMesh& mesh, const DofLayout& layout, const Vec& coefficients);

/// Flux-normalised RT0 shape function of element k for local facet i:
/// (x - p_i) / (d |K|), unit outward flux through facet i.
Vec3 rt0_shape(const SimplicialMesh& mesh, Index k, int local_facet, const Vec3& x);

/// Flux int_e Phi_K . n_e . {.} of the enrichment basis of element k through
/// its local facet i, i.e. the facet coefficient of R Phi_K (0 on boundary).
double enrichment_facet_flux(const SimplicialMesh& mesh, Index k, int local_facet);

enum class LoadMode { plain, reconstructed };

struct LoadVectors {
  Vec f_D;
  Vec f_C;
};

/// (f, v) or (f, R v) over the velocity basis, degree-5 quadrature.
LoadVectors assemble_load(const SimplicialMesh& mesh, const DofLayout& layout, const VectorField& f, LoadMode mode);

/// Weak boundary-data contributions, before strong elimination.
struct BoundaryData {
  Vec momentum_D;   // nu(-<(grad v)n, g> + rho <h^-1 g, v>) per enrichment DoF
  Vec momentum_C;   // same, per continuous DoF
  Vec continuity;   // -<g.n, q> per pressure DoF (b-convention)
  std::vector<Index> boundary_dofs;  // positions in the U^C block
  Vec boundary_values;               // g interpolated at those DoFs
};

BoundaryData assemble_boundary_data(const SimplicialMesh& mesh, const DofLayout& layout, const VectorField& g,
                                    double nu, double rho);

/// D_DD = diag(A_DD) as a sparse diagonal matrix.
SpMat assemble_perturbed(const SpMat& A_DD);

/// Writes a sparse matrix in Matrix Market coordinate format.
void write_matrix_market(const SpMat& m, const std::string& path);

}  // namespace egstokes
