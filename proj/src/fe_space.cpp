#include "egstokes/fe_space.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace egstokes {

namespace {

using Bary = std::array<double, 4>;

void add_orbit_1d(QuadratureRule& q, double a, double w) {
  q.points.push_back({a, 1.0 - a, 0.0, 0.0});
  q.weights.push_back(w);
  if (a != 0.5) {
    q.points.push_back({1.0 - a, a, 0.0, 0.0});
    q.weights.push_back(w);
  }
}

// (a, a, 1-2a) and permutations.
void add_orbit_tri(QuadratureRule& q, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  q.points.push_back({a, a, b, 0.0});
  q.points.push_back({a, b, a, 0.0});
  q.points.push_back({b, a, a, 0.0});
  q.weights.insert(q.weights.end(), 3, w);
}

// (a, a, a, 1-3a) and permutations.
void add_orbit_tet4(QuadratureRule& q, double a, double w) {
  const double b = 1.0 - 3.0 * a;
  for (int i = 0; i < 4; ++i) {
    Bary p{a, a, a, a};
    p[i] = b;
    q.points.push_back(p);
    q.weights.push_back(w);
  }
}

// (a, a, b, b) with b = 1/2 - a and permutations.
void add_orbit_tet6(QuadratureRule& q, double a, double w) {
  const double b = 0.5 - a;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      Bary p{b, b, b, b};
      p[i] = a;
      p[j] = a;
      q.points.push_back(p);
      q.weights.push_back(w);
    }
  }
}

QuadratureRule make_rule(int dim, int degree) {
  QuadratureRule q;
  q.dim = dim;
  if (dim == 1) {
    if (degree <= 1) {
      q.degree = 1;
      add_orbit_1d(q, 0.5, 1.0);
    } else if (degree <= 3) {
      q.degree = 3;
      add_orbit_1d(q, 0.5 - 0.5 / std::sqrt(3.0), 0.5);
    } else {
      q.degree = 5;
      add_orbit_1d(q, 0.5, 4.0 / 9.0);
      add_orbit_1d(q, 0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18.0);
    }
  } else if (dim == 2) {
    if (degree <= 1) {
      q.degree = 1;
      q.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0});
      q.weights.push_back(1.0);
    } else if (degree == 2) {
      q.degree = 2;
      add_orbit_tri(q, 1.0 / 6.0, 1.0 / 3.0);
    } else if (degree <= 4) {
      q.degree = 4;
      add_orbit_tri(q, 0.445948490915965, 0.223381589678011);
      add_orbit_tri(q, 0.091576213509771, 0.109951743655322);
    } else {
      // Seven-point rule of Radon.
      q.degree = 5;
      q.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0});
      q.weights.push_back(0.225);
      const double s = std::sqrt(15.0);
      add_orbit_tri(q, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
      add_orbit_tri(q, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
    }
  } else if (dim == 3) {
    if (degree <= 1) {
      q.degree = 1;
      q.points.push_back({0.25, 0.25, 0.25, 0.25});
      q.weights.push_back(1.0);
    } else if (degree == 2) {
      q.degree = 2;
      add_orbit_tet4(q, (5.0 - std::sqrt(5.0)) / 20.0, 0.25);
    } else {
      // Fourteen-point degree-5 rule with positive weights (Walkington).
      q.degree = 5;
      add_orbit_tet4(q, 0.31088591926330060980, 0.11268792571801585080);
      add_orbit_tet4(q, 0.09273525031089122640, 0.07349304311636194955);
      add_orbit_tet6(q, 0.04550370412564964949, 0.04254602077708146644);
    }
  }
  return q;
}

}  // namespace

const QuadratureRule& quadrature_rule(int dim, int degree) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("quadrature_rule: dim must be 1, 2 or 3");
  if (degree < 0 || degree > 5) {
    throw std::invalid_argument("quadrature_rule: degree " + std::to_string(degree) + " not supported");
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace({dim, degree});
  if (inserted) it->second = make_rule(dim, degree);
  return it->second;
}

Vec3 barycentric_to_point(const Bary& bary, std::span<const Vec3> corners) {
  Vec3 x = Vec3::Zero();
  for (std::size_t i = 0; i < corners.size(); ++i) x += bary[i] * corners[i];
  return x;
}

std::array<Vec3, 4> p1_gradients(const SimplicialMesh& mesh, Index k) {
  const int d = mesh.dim();
  const auto el = mesh.element(k);
  const Vec3& p0 = mesh.vertex(el[0]);
  std::array<Vec3, 4> grads{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  if (d == 2) {
    Eigen::Matrix2d jac;
    jac.col(0) = (mesh.vertex(el[1]) - p0).head<2>();
    jac.col(1) = (mesh.vertex(el[2]) - p0).head<2>();
    const double det = jac.determinant();
    if (std::abs(det) < 1e-300) throw std::invalid_argument("p1_gradients: degenerate element");
    const Eigen::Matrix2d inv = jac.inverse();
    for (int i = 0; i < 2; ++i) grads[i + 1].head<2>() = inv.row(i).transpose();
  } else {
    Mat3 jac;
    jac.col(0) = mesh.vertex(el[1]) - p0;
    jac.col(1) = mesh.vertex(el[2]) - p0;
    jac.col(2) = mesh.vertex(el[3]) - p0;
    const double det = jac.determinant();
    if (std::abs(det) < 1e-300) throw std::invalid_argument("p1_gradients: degenerate element");
    const Mat3 inv = jac.inverse();
    for (int i = 0; i < 3; ++i) grads[i + 1] = inv.row(i).transpose();
  }
  for (int i = 1; i <= d; ++i) grads[0] -= grads[i];
  return grads;
}

P1Values eval_p1_basis(const SimplicialMesh& mesh, Index k, const Vec3& x) {
  P1Values out;
  out.gradients = p1_gradients(mesh, k);
  const int d = mesh.dim();
  const Vec3 dx = x - mesh.centroid(k);
  for (int i = 0; i <= d; ++i) out.values[i] = 1.0 / (d + 1) + out.gradients[i].dot(dx);
  return out;
}

Mat3 spatial_identity(int dim) {
  Mat3 id = Mat3::Zero();
  for (int i = 0; i < dim; ++i) id(i, i) = 1.0;
  return id;
}

EnrichmentValue eval_enrichment(const SimplicialMesh& mesh, Index k, const Vec3& x) {
  if (!(mesh.volume(k) > 0.0)) throw std::invalid_argument("eval_enrichment: degenerate element");
  EnrichmentValue out;
  out.value = x - mesh.centroid(k);
  out.gradient = spatial_identity(mesh.dim());
  out.divergence = mesh.dim();
  return out;
}

DofLayout::DofLayout(const SimplicialMesh& mesh)
    : dim_(mesh.dim()),
      n_elements_(mesh.num_elements()),
      n_vertices_(mesh.num_vertices()),
      boundary_vertex_(mesh.boundary_vertex_mask()) {}

std::vector<Index> DofLayout::boundary_continuous_dofs() const {
  std::vector<Index> dofs;
  for (Index v = 0; v < n_vertices_; ++v) {
    if (!boundary_vertex_[v]) continue;
    for (int c = 0; c < dim_; ++c) dofs.push_back(continuous_local(v, c));
  }
  return dofs;
}

DofLayout build_dof_layout(const SimplicialMesh& mesh) { return DofLayout(mesh); }

EgFunction::EgFunction(const SimplicialMesh& mesh, const DofLayout& layout, std::span<const double> coefficients)
    : mesh_(&mesh), layout_(&layout), coefficients_(coefficients) {
  if (static_cast<Index>(coefficients.size()) < layout.num_velocity()) {
    throw std::invalid_argument("EgFunction: coefficient vector shorter than the velocity space");
  }
}

Vec3 EgFunction::continuous_value(Index v) const {
  Vec3 out = Vec3::Zero();
  for (int c = 0; c < layout_->dim(); ++c) out[c] = coefficients_[layout_->continuous(v, c)];
  return out;
}

Vec3 EgFunction::continuous_part(Index k, const Vec3& x) const {
  const P1Values p1 = eval_p1_basis(*mesh_, k, x);
  const auto el = mesh_->element(k);
  Vec3 out = Vec3::Zero();
  for (int i = 0; i <= mesh_->dim(); ++i) out += p1.values[i] * continuous_value(el[i]);
  return out;
}

Vec3 EgFunction::value(Index k, const Vec3& x) const {
  return continuous_part(k, x) + enrichment_coefficient(k) * (x - mesh_->centroid(k));
}

Mat3 EgFunction::gradient(Index k) const {
  const auto grads = p1_gradients(*mesh_, k);
  const auto el = mesh_->element(k);
  Mat3 g = enrichment_coefficient(k) * spatial_identity(mesh_->dim());
  for (int i = 0; i <= mesh_->dim(); ++i) g += continuous_value(el[i]) * grads[i].transpose();
  return g;
}

}  // namespace egstokes
