#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace egstokes {

using Index = int;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One edge (2D) or triangular face (3D) of the mesh.
///
/// The normal points from `plus` into `minus` on interior facets and out of
/// the domain on boundary facets. `plus` is always the lower element index.
struct Facet {
  std::array<Index, 3> vertices{-1, -1, -1};  // sorted, first `dim` entries used
  double measure = 0.0;                       // length (2D) or area (3D)
  double h = 0.0;                             // measure^(1/(dim-1))
  Vec3 normal = Vec3::Zero();
  Vec3 centroid = Vec3::Zero();
  Index plus = -1;
  Index minus = -1;
  int plus_local = -1;   // local facet number in `plus` (= opposite local vertex)
  int minus_local = -1;

  [[nodiscard]] bool is_boundary() const { return minus < 0; }
};

/// Conforming triangle/tetrahedron mesh with precomputed facet topology.
///
/// Vertices are stored as 3-vectors; in 2D the z component is zero. Element
/// vertex lists hold dim+1 valid entries, oriented so the signed volume is
/// positive. Local facet i of an element is the facet opposite local vertex i.
class SimplicialMesh {
 public:
  SimplicialMesh() = default;
  SimplicialMesh(int dim, std::vector<Vec3> vertices, std::vector<std::array<Index, 4>> elements);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  [[nodiscard]] Index num_elements() const { return static_cast<Index>(elements_.size()); }
  [[nodiscard]] Index num_facets() const { return static_cast<Index>(facets_.size()); }

  [[nodiscard]] const Vec3& vertex(Index v) const { return vertices_[v]; }
  [[nodiscard]] std::span<const Vec3> vertices() const { return vertices_; }

  /// The dim+1 vertex indices of element `k`.
  [[nodiscard]] std::span<const Index> element(Index k) const {
    return {elements_[k].data(), std::size_t(dim_ + 1)};
  }
  [[nodiscard]] const std::vector<std::array<Index, 4>>& elements() const { return elements_; }

  [[nodiscard]] double volume(Index k) const { return volumes_[k]; }
  [[nodiscard]] const Vec3& centroid(Index k) const { return centroids_[k]; }
  [[nodiscard]] std::span<const double> volumes() const { return volumes_; }

  [[nodiscard]] const Facet& facet(Index f) const { return facets_[f]; }
  [[nodiscard]] std::span<const Facet> facets() const { return facets_; }

  /// Global facet opposite local vertex `local` of element `k`.
  [[nodiscard]] Index element_facet(Index k, int local) const {
    return element_facets_[k][local];
  }

  /// Sum of element volumes.
  [[nodiscard]] double measure() const;
  [[nodiscard]] Index num_boundary_facets() const;
  [[nodiscard]] Index num_interior_facets() const { return num_facets() - num_boundary_facets(); }

  /// True for every vertex that lies on a boundary facet.
  [[nodiscard]] const std::vector<bool>& boundary_vertex_mask() const { return boundary_vertex_; }

  /// Largest element diameter.
  [[nodiscard]] double mesh_size() const;

 private:
  int dim_ = 0;
  std::vector<Vec3> vertices_;
  std::vector<std::array<Index, 4>> elements_;
  std::vector<double> volumes_;
  std::vector<Vec3> centroids_;
  std::vector<Facet> facets_;
  std::vector<std::array<Index, 4>> element_facets_;
  std::vector<bool> boundary_vertex_;
};

/// Signed measure of the simplex spanned by `element` (dim+1 vertices).
double signed_volume(int dim, std::span<const Vec3> vertices, std::span<const Index> element);

/// Sorts facets by their sorted vertex tuple and pairs them with their
/// elements. Throws std::invalid_argument if a facet is shared by more than
/// two elements.
std::vector<Facet> build_facet_topology(int dim, std::span<const Vec3> vertices,
                                        std::span<const std::array<Index, 4>> elements);

/// n x n squares on (0,1)^2, each cut along its lower-left to upper-right diagonal.
SimplicialMesh build_unit_square_mesh(int n);

/// n^3 cubes on (0,1)^3, each cut into the six Kuhn tetrahedra around its main diagonal.
SimplicialMesh build_unit_cube_mesh(int n);

/// (0,1)^3 without the column (0.5,1)x(0.5,1)x(0,1). Requires even n.
SimplicialMesh build_lshape_cylinder_mesh(int n);

/// Data attached to a legacy VTK export. Point arrays need num_vertices
/// entries, cell arrays num_elements.
struct VtkData {
  std::vector<std::pair<std::string, std::vector<Vec3>>> point_vectors;
  std::vector<std::pair<std::string, std::vector<Vec3>>> cell_vectors;
  std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
};

/// Legacy ASCII unstructured grid (cell types 5 and 10).
void write_vtk(const SimplicialMesh& mesh, const std::string& path, const VtkData& data = {});

}  // namespace egstokes
