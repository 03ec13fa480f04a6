#include "egstokes/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace egstokes {

namespace {

template <typename F>
void for_element_points(const SimplicialMesh& mesh, Index k, int degree, F&& fn) {
  const int d = mesh.dim();
  const QuadratureRule& q = quadrature_rule(d, degree);
  const auto el = mesh.element(k);
  std::array<Vec3, 4> corners;
  for (int i = 0; i <= d; ++i) corners[i] = mesh.vertex(el[i]);
  for (std::size_t i = 0; i < q.size(); ++i) {
    fn(barycentric_to_point(q.points[i], {corners.data(), std::size_t(d + 1)}), q.weights[i] * mesh.volume(k));
  }
}

template <typename F>
void for_facet_points(const SimplicialMesh& mesh, const Facet& f, int degree, F&& fn) {
  const int d = mesh.dim();
  const QuadratureRule& q = quadrature_rule(d - 1, degree);
  std::array<Vec3, 3> corners;
  for (int c = 0; c < d; ++c) corners[c] = mesh.vertex(f.vertices[c]);
  for (std::size_t i = 0; i < q.size(); ++i) {
    fn(barycentric_to_point(q.points[i], {corners.data(), std::size_t(d)}), q.weights[i] * f.measure);
  }
}

}  // namespace

double energy_error(const SimplicialMesh& mesh, const DofLayout& layout, const TensorField& grad_u,
                    const VectorField& g, const Vec& coefficients, double rho) {
  const EgFunction uh(mesh, layout, {coefficients.data(), std::size_t(coefficients.size())});
  const int d = mesh.dim();
  double volume = 0.0;
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    const Mat3 gh = uh.gradient(k);
    for_element_points(mesh, k, 5, [&](const Vec3& x, double w) {
      volume += w * (grad_u(x) - gh).topLeftCorner(d, d).squaredNorm();
    });
  }
  double jumps = 0.0;
  for (const Facet& f : mesh.facets()) {
    double s = 0.0;
    for_facet_points(mesh, f, 5, [&](const Vec3& x, double w) {
      const Vec3 jump = f.is_boundary() ? Vec3(g(x) - uh.value(f.plus, x)) : Vec3(uh.value(f.minus, x) - uh.value(f.plus, x));
      s += w * jump.squaredNorm();
    });
    jumps += rho / f.h * s;
  }
  return std::sqrt(volume + jumps);
}

Vec pressure_projection(const SimplicialMesh& mesh, const ScalarField& p) {
  Vec out(mesh.num_elements());
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    double s = 0.0;
    for_element_points(mesh, k, 5, [&](const Vec3& x, double w) { s += w * p(x); });
    out[k] = s / mesh.volume(k);
  }
  return out;
}

PressureErrors pressure_errors(const SimplicialMesh& mesh, const ScalarField& p, double p_mean, const Vec& p_h) {
  if (p_h.size() != mesh.num_elements()) throw std::invalid_argument("pressure_errors: size mismatch");
  PressureErrors out;
  double l2 = 0.0, aux = 0.0;
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    double mean = 0.0;
    for_element_points(mesh, k, 5, [&](const Vec3& x, double w) {
      const double e = p(x) - p_mean - p_h[k];
      l2 += w * e * e;
      mean += w * (p(x) - p_mean);
    });
    const double e0 = mean / mesh.volume(k) - p_h[k];
    aux += mesh.volume(k) * e0 * e0;
  }
  out.l2 = std::sqrt(l2);
  out.auxiliary = std::sqrt(aux);
  return out;
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& h) {
  if (errors.size() != h.size()) throw std::invalid_argument("eoc: errors and h differ in length");
  std::vector<double> rates;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0)) throw std::invalid_argument("eoc: errors must be positive");
    if (i == 0) continue;
    if (!(h[i] < h[i - 1])) throw std::invalid_argument("eoc: h must be strictly decreasing");
    rates.push_back(std::log(errors[i - 1] / errors[i]) / std::log(h[i - 1] / h[i]));
  }
  return rates;
}

DivergenceReport divergence_report(const ReconstructedField& field, const SimplicialMesh& mesh) {
  DivergenceReport out;
  out.per_element = field.divergences();
  out.max_abs = mesh.num_elements() > 0 ? out.per_element.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

ErrorReport compute_errors(const SimplicialMesh& mesh, const DofLayout& layout, const ProblemSpec& problem,
                           const Vec& solution, double rho) {
  ErrorReport r;
  r.nu = problem.nu;
  r.h = mesh.mesh_size();
  const Vec u = solution.head(layout.num_velocity());
  const Vec p = solution.tail(layout.num_pressure());
  r.velocity_energy = energy_error(mesh, layout, problem.grad_u, problem.g, u, rho);
  const PressureErrors pe = pressure_errors(mesh, problem.p, problem.pressure_mean, p);
  r.pressure_l2 = pe.l2;
  r.pressure_auxiliary = pe.auxiliary;
  r.max_divergence = divergence_report(reconstruct(mesh, layout, u), mesh).max_abs;
  return r;
}

}  // namespace egstokes
