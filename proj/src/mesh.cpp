#include "egstokes/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace egstokes {

namespace {

Vec3 facet_normal(int dim, const std::array<Vec3, 3>& p) {
  if (dim == 2) {
    const Vec3 t = p[1] - p[0];
    return Vec3(t.y(), -t.x(), 0.0).normalized();
  }
  return (p[1] - p[0]).cross(p[2] - p[0]).normalized();
}

double facet_measure(int dim, const std::array<Vec3, 3>& p) {
  if (dim == 2) return (p[1] - p[0]).norm();
  return 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
}

}  // namespace

double signed_volume(int dim, std::span<const Vec3> vertices, std::span<const Index> element) {
  const Vec3& p0 = vertices[element[0]];
  const Vec3 a = vertices[element[1]] - p0;
  const Vec3 b = vertices[element[2]] - p0;
  if (dim == 2) return 0.5 * (a.x() * b.y() - a.y() * b.x());
  const Vec3 c = vertices[element[3]] - p0;
  return a.dot(b.cross(c)) / 6.0;
}

std::vector<Facet> build_facet_topology(int dim, std::span<const Vec3> vertices,
                                        std::span<const std::array<Index, 4>> elements) {
  struct LocalFacet {
    std::array<Index, 3> key;
    Index element;
    int local;
  };
  const int nv = dim + 1;
  std::vector<LocalFacet> all;
  all.reserve(elements.size() * nv);
  for (std::size_t k = 0; k < elements.size(); ++k) {
    for (int i = 0; i < nv; ++i) {
      LocalFacet lf{{-1, -1, -1}, static_cast<Index>(k), i};
      int m = 0;
      for (int j = 0; j < nv; ++j) {
        if (j != i) lf.key[m++] = elements[k][j];
      }
      std::sort(lf.key.begin(), lf.key.begin() + dim);
      all.push_back(lf);
    }
  }
  std::sort(all.begin(), all.end(), [](const LocalFacet& a, const LocalFacet& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.element < b.element;
  });

  std::vector<Facet> facets;
  facets.reserve(all.size() / 2 + 1);
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i + 1;
    while (j < all.size() && all[j].key == all[i].key) ++j;
    if (j - i > 2) {
      throw std::invalid_argument("build_facet_topology: facet shared by " + std::to_string(j - i) +
                                  " elements (non-manifold mesh)");
    }
    Facet f;
    f.vertices = all[i].key;
    f.plus = all[i].element;
    f.plus_local = all[i].local;
    if (j - i == 2) {
      f.minus = all[i + 1].element;
      f.minus_local = all[i + 1].local;
    }
    std::array<Vec3, 3> p{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    for (int c = 0; c < dim; ++c) {
      p[c] = vertices[f.vertices[c]];
    }
    f.centroid = Vec3::Zero();
    for (int c = 0; c < dim; ++c) f.centroid += p[c];
    f.centroid /= dim;
    f.measure = facet_measure(dim, p);
    f.h = dim == 2 ? f.measure : std::sqrt(f.measure);
    f.normal = facet_normal(dim, p);
    // Orient away from the vertex of K+ that is not on the facet.
    const Index opposite = elements[f.plus][f.plus_local];
    if (f.normal.dot(f.centroid - vertices[opposite]) < 0.0) f.normal = -f.normal;
    facets.push_back(f);
    i = j;
  }
  return facets;
}

SimplicialMesh::SimplicialMesh(int dim, std::vector<Vec3> vertices,
                               std::vector<std::array<Index, 4>> elements)
    : dim_(dim), vertices_(std::move(vertices)), elements_(std::move(elements)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("SimplicialMesh: dim must be 2 or 3");
  const auto nvert = static_cast<Index>(vertices_.size());
  volumes_.resize(elements_.size());
  centroids_.resize(elements_.size());
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    auto& el = elements_[k];
    for (int i = dim_ + 1; i < 4; ++i) el[i] = -1;
    for (int i = 0; i <= dim_; ++i) {
      if (el[i] < 0 || el[i] >= nvert) {
        throw std::invalid_argument("SimplicialMesh: element vertex index out of range");
      }
    }
    double vol = signed_volume(dim_, vertices_, {el.data(), std::size_t(dim_ + 1)});
    if (vol < 0.0) {
      std::swap(el[1], el[2]);
      vol = -vol;
    }
    if (!(vol > 0.0)) throw std::invalid_argument("SimplicialMesh: degenerate element");
    volumes_[k] = vol;
    Vec3 c = Vec3::Zero();
    for (int i = 0; i <= dim_; ++i) c += vertices_[el[i]];
    centroids_[k] = c / (dim_ + 1);
  }

  facets_ = build_facet_topology(dim_, vertices_, elements_);
  element_facets_.assign(elements_.size(), {-1, -1, -1, -1});
  boundary_vertex_.assign(vertices_.size(), false);
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    const Facet& fc = facets_[f];
    element_facets_[fc.plus][fc.plus_local] = static_cast<Index>(f);
    if (!fc.is_boundary()) {
      element_facets_[fc.minus][fc.minus_local] = static_cast<Index>(f);
    } else {
      for (int c = 0; c < dim_; ++c) boundary_vertex_[fc.vertices[c]] = true;
    }
  }
}

double SimplicialMesh::measure() const {
  return std::accumulate(volumes_.begin(), volumes_.end(), 0.0);
}

Index SimplicialMesh::num_boundary_facets() const {
  return static_cast<Index>(
      std::count_if(facets_.begin(), facets_.end(), [](const Facet& f) { return f.is_boundary(); }));
}

double SimplicialMesh::mesh_size() const {
  double h = 0.0;
  for (const auto& el : elements_) {
    for (int i = 0; i <= dim_; ++i) {
      for (int j = i + 1; j <= dim_; ++j) {
        h = std::max(h, (vertices_[el[i]] - vertices_[el[j]]).norm());
      }
    }
  }
  return h;
}

SimplicialMesh build_unit_square_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_unit_square_mesh: n must be >= 1");
  const int m = n + 1;
  std::vector<Vec3> vertices;
  vertices.reserve(m * m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) vertices.emplace_back(double(i) / n, double(j) / n, 0.0);
  }
  auto id = [m](int i, int j) { return j * m + i; };
  std::vector<std::array<Index, 4>> elements;
  elements.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), -1});
      elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1), -1});
    }
  }
  return {2, std::move(vertices), std::move(elements)};
}

namespace {

std::vector<std::array<Index, 4>> kuhn_elements(int n) {
  const int m = n + 1;
  auto id = [m](int i, int j, int k) { return i + m * (j + m * k); };
  // Axis orders of the six monotone lattice paths from (0,0,0) to (1,1,1).
  constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<std::array<Index, 4>> elements;
  elements.reserve(6 * n * n * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<Index, 4> el{};
          el[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            el[s + 1] = id(c[0], c[1], c[2]);
          }
          elements.push_back(el);
        }
      }
    }
  }
  return elements;
}

std::vector<Vec3> lattice_vertices(int n) {
  const int m = n + 1;
  std::vector<Vec3> vertices;
  vertices.reserve(m * m * m);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);
    }
  }
  return vertices;
}

}  // namespace

SimplicialMesh build_unit_cube_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_unit_cube_mesh: n must be >= 1");
  return {3, lattice_vertices(n), kuhn_elements(n)};
}

SimplicialMesh build_lshape_cylinder_mesh(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("build_lshape_cylinder_mesh: n must be even and >= 2");
  const std::vector<Vec3> all_vertices = lattice_vertices(n);
  std::vector<std::array<Index, 4>> kept;
  for (const auto& el : kuhn_elements(n)) {
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < 4; ++i) c += all_vertices[el[i]];
    c /= 4.0;
    if (c.x() > 0.5 && c.y() > 0.5) continue;
    kept.push_back(el);
  }
  // Compact away vertices that only belonged to removed tetrahedra.
  std::vector<Index> renumber(all_vertices.size(), -1);
  for (const auto& el : kept) {
    for (int i = 0; i < 4; ++i) renumber[el[i]] = 0;
  }
  std::vector<Vec3> vertices;
  for (std::size_t v = 0; v < all_vertices.size(); ++v) {
    if (renumber[v] == 0) {
      renumber[v] = static_cast<Index>(vertices.size());
      vertices.push_back(all_vertices[v]);
    }
  }
  for (auto& el : kept) {
    for (int i = 0; i < 4; ++i) el[i] = renumber[el[i]];
  }
  return {3, std::move(vertices), std::move(kept)};
}

}  // namespace egstokes

namespace egstokes {

void write_vtk(const SimplicialMesh& mesh, const std::string& path, const VtkData& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path);
  out << std::setprecision(16);
  const int d = mesh.dim();
  const Index nv = mesh.num_vertices(), ne = mesh.num_elements();
  out << "# vtk DataFile Version 3.0\negstokes\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const Vec3& x : mesh.vertices()) out << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  out << "CELLS " << ne << ' ' << ne * (d + 2) << '\n';
  for (Index k = 0; k < ne; ++k) {
    out << d + 1;
    for (Index v : mesh.element(k)) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << ne << '\n';
  for (Index k = 0; k < ne; ++k) out << (d == 2 ? 5 : 10) << '\n';

  auto vectors = [&](const std::string& name, const std::vector<Vec3>& v, Index expected) {
    if (static_cast<Index>(v.size()) != expected) throw std::invalid_argument("write_vtk: wrong length for " + name);
    out << "VECTORS " << name << " double\n";
    for (const Vec3& x : v) out << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  };
  if (!data.point_vectors.empty()) {
    out << "POINT_DATA " << nv << '\n';
    for (const auto& [name, v] : data.point_vectors) vectors(name, v, nv);
  }
  if (!data.cell_vectors.empty() || !data.cell_scalars.empty()) {
    out << "CELL_DATA " << ne << '\n';
    for (const auto& [name, v] : data.cell_vectors) vectors(name, v, ne);
    for (const auto& [name, s] : data.cell_scalars) {
      if (static_cast<Index>(s.size()) != ne) throw std::invalid_argument("write_vtk: wrong length for " + name);
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double x : s) out << x << '\n';
    }
  }
}

}  // namespace egstokes
