#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "egstokes/mesh.hpp"

namespace egstokes {

/// Quadrature on the reference simplex of dimension `dim` (1, 2 or 3).
///
/// Points are barycentric (dim+1 coordinates); weights sum to one and are
/// scaled by the cell measure where the rule is used.
struct QuadratureRule {
  int dim = 0;
  int degree = 0;
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Positive symmetric rule exact for polynomials up to `degree` (<= 5).
/// Throws std::invalid_argument for unsupported dim/degree.
const QuadratureRule& quadrature_rule(int dim, int degree);

/// Maps barycentric coordinates on a simplex with the given corners to a point.
Vec3 barycentric_to_point(const std::array<double, 4>& bary, std::span<const Vec3> corners);

/// Values and (constant) gradients of the dim+1 barycentric functions of an element.
struct P1Values {
  std::array<double, 4> values{};
  std::array<Vec3, 4> gradients{};
};

/// Gradients of the barycentric functions of element `k`.
/// Throws std::invalid_argument for a degenerate element.
std::array<Vec3, 4> p1_gradients(const SimplicialMesh& mesh, Index k);

P1Values eval_p1_basis(const SimplicialMesh& mesh, Index k, const Vec3& x);

/// Enrichment basis Phi_K(x) = x - x_K on element K.
struct EnrichmentValue {
  Vec3 value = Vec3::Zero();
  Mat3 gradient = Mat3::Zero();  // identity in the first dim rows/cols
  double divergence = 0.0;
};

EnrichmentValue eval_enrichment(const SimplicialMesh& mesh, Index k, const Vec3& x);

/// d x d identity embedded in a 3x3 matrix.
Mat3 spatial_identity(int dim);

/// Global numbering in block order (U^D, U^C, P):
///   enrichment  [0, nD)                 one per element,
///   continuous  [nD, nD + d*nV)         vertex-major, component-minor,
///   pressure    [nD + d*nV, + nE)       one per element.
class DofLayout {
 public:
  DofLayout() = default;
  explicit DofLayout(const SimplicialMesh& mesh);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] Index num_elements() const { return n_elements_; }
  [[nodiscard]] Index num_vertices() const { return n_vertices_; }

  [[nodiscard]] Index num_enrichment() const { return n_elements_; }
  [[nodiscard]] Index num_continuous() const { return dim_ * n_vertices_; }
  [[nodiscard]] Index num_velocity() const { return num_enrichment() + num_continuous(); }
  [[nodiscard]] Index num_pressure() const { return n_elements_; }
  [[nodiscard]] Index num_total() const { return num_velocity() + num_pressure(); }

  [[nodiscard]] Index enrichment(Index k) const { return k; }
  [[nodiscard]] Index continuous(Index v, int component) const { return n_elements_ + dim_ * v + component; }
  [[nodiscard]] Index pressure(Index k) const { return num_velocity() + k; }

  /// Offset of a continuous DoF inside the U^C block.
  [[nodiscard]] Index continuous_local(Index v, int component) const { return dim_ * v + component; }

  [[nodiscard]] const std::vector<bool>& boundary_vertex_mask() const { return boundary_vertex_; }

  /// Positions inside the U^C block of all continuous DoFs at boundary vertices.
  [[nodiscard]] std::vector<Index> boundary_continuous_dofs() const;

 private:
  int dim_ = 0;
  Index n_elements_ = 0;
  Index n_vertices_ = 0;
  std::vector<bool> boundary_vertex_;
};

DofLayout build_dof_layout(const SimplicialMesh& mesh);

/// Read-only view of a velocity coefficient vector v = v^C + v^D.
class EgFunction {
 public:
  EgFunction(const SimplicialMesh& mesh, const DofLayout& layout, std::span<const double> coefficients);

  /// Nodal value of v^C at vertex `v`.
  [[nodiscard]] Vec3 continuous_value(Index v) const;
  /// Coefficient c_K of v^D on element `k`.
  [[nodiscard]] double enrichment_coefficient(Index k) const { return coefficients_[layout_->enrichment(k)]; }

  /// v^C + v^D restricted to element k, evaluated at x.
  [[nodiscard]] Vec3 value(Index k, const Vec3& x) const;
  [[nodiscard]] Vec3 continuous_part(Index k, const Vec3& x) const;
  /// Constant gradient of v on element k (row i = gradient of component i).
  [[nodiscard]] Mat3 gradient(Index k) const;

 private:
  const SimplicialMesh* mesh_;
  const DofLayout* layout_;
  std::span<const double> coefficients_;
};

}  // namespace egstokes
