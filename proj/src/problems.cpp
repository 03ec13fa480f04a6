#include "egstokes/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace egstokes {

namespace {

constexpr double pi = std::numbers::pi;

// a(t) = t^2 (t-1)^2 and its derivatives.
double a0(double t) { return t * t * (t - 1) * (t - 1); }
double a1(double t) { return 2 * t * (t - 1) * (2 * t - 1); }
double a2(double t) { return 12 * t * t - 12 * t + 2; }
double a3(double t) { return 24 * t - 12; }

ProblemSpec vortex2d(double) {
  ProblemSpec p;
  p.id = "vortex2d";
  p.dim = 2;
  p.rho = 10.0;
  p.homogeneous = true;
  p.build_mesh = build_unit_square_mesh;
  p.u = [](const Vec3& x) { return Vec3(5 * a0(x[0]) * a1(x[1]), -5 * a1(x[0]) * a0(x[1]), 0.0); };
  p.grad_u = [](const Vec3& x) {
    Mat3 g = Mat3::Zero();
    g(0, 0) = 5 * a1(x[0]) * a1(x[1]);
    g(0, 1) = 5 * a0(x[0]) * a2(x[1]);
    g(1, 0) = -5 * a2(x[0]) * a0(x[1]);
    g(1, 1) = -5 * a1(x[0]) * a1(x[1]);
    return g;
  };
  p.laplacian_u = [](const Vec3& x) {
    return Vec3(5 * (a2(x[0]) * a1(x[1]) + a0(x[0]) * a3(x[1])), -5 * (a3(x[0]) * a0(x[1]) + a1(x[0]) * a2(x[1])),
                0.0);
  };
  p.p = [](const Vec3& x) { return 10 * (2 * x[0] - 1) * (2 * x[1] - 1); };
  p.grad_p = [](const Vec3& x) { return Vec3(20 * (2 * x[1] - 1), 20 * (2 * x[0] - 1), 0.0); };
  return p;
}

ProblemSpec cube3d(double) {
  ProblemSpec p;
  p.id = "cube3d";
  p.dim = 3;
  p.rho = 2.0;
  p.pressure_mean = std::pow(2.0 / pi, 3);
  p.build_mesh = build_unit_cube_mesh;
  // u_c = sin(pi a) (cos(pi b) - cos(pi e)) with (a, b, e) the cyclic shift starting at c.
  p.u = [](const Vec3& x) {
    Vec3 u;
    for (int c = 0; c < 3; ++c) {
      const double a = x[c], b = x[(c + 1) % 3], e = x[(c + 2) % 3];
      u[c] = std::sin(pi * a) * (std::cos(pi * b) - std::cos(pi * e));
    }
    return u;
  };
  p.grad_u = [](const Vec3& x) {
    Mat3 g;
    for (int c = 0; c < 3; ++c) {
      const int ib = (c + 1) % 3, ie = (c + 2) % 3;
      const double a = x[c], b = x[ib], e = x[ie];
      g(c, c) = pi * std::cos(pi * a) * (std::cos(pi * b) - std::cos(pi * e));
      g(c, ib) = -pi * std::sin(pi * a) * std::sin(pi * b);
      g(c, ie) = pi * std::sin(pi * a) * std::sin(pi * e);
    }
    return g;
  };
  const VectorField u = p.u;
  p.laplacian_u = [u](const Vec3& x) -> Vec3 { return -2 * pi * pi * u(x); };
  p.p = [](const Vec3& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]); };
  p.grad_p = [](const Vec3& x) {
    const Vec3 s(std::sin(pi * x[0]), std::sin(pi * x[1]), std::sin(pi * x[2]));
    const Vec3 c(std::cos(pi * x[0]), std::cos(pi * x[1]), std::cos(pi * x[2]));
    return Vec3(pi * c[0] * s[1] * s[2], pi * s[0] * c[1] * s[2], pi * s[0] * s[1] * c[2]);
  };
  return p;
}

ProblemSpec lshape3d(double) {
  ProblemSpec p;
  p.id = "lshape3d";
  p.dim = 3;
  p.rho = 2.0;
  p.domain_measure = 0.75;
  p.pressure_mean = 0.5;
  p.build_mesh = build_lshape_cylinder_mesh;
  p.u = [](const Vec3& x) {
    const double r = x[0] * x[0] + x[1] * x[1] + 1;
    return Vec3(-x[1] / r, x[0] / r, 0.0);
  };
  p.grad_u = [](const Vec3& x) {
    const double r = x[0] * x[0] + x[1] * x[1] + 1;
    const double r2 = r * r;
    Mat3 g = Mat3::Zero();
    g(0, 0) = 2 * x[0] * x[1] / r2;
    g(0, 1) = (2 * x[1] * x[1] - r) / r2;
    g(1, 0) = (r - 2 * x[0] * x[0]) / r2;
    g(1, 1) = -2 * x[0] * x[1] / r2;
    return g;
  };
  p.laplacian_u = [](const Vec3& x) {
    const double r = x[0] * x[0] + x[1] * x[1] + 1;
    const double r3 = r * r * r;
    return Vec3(8 * x[1] / r3, -8 * x[0] / r3, 0.0);
  };
  p.p = [](const Vec3& x) { return std::abs(2 * x[0] - 1); };
  // One-sided derivative; quadrature points never sit on x = 1/2.
  p.grad_p = [](const Vec3& x) { return Vec3(2 * x[0] - 1 >= 0 ? 2.0 : -2.0, 0.0, 0.0); };
  return p;
}

}  // namespace

ProblemSpec get_problem(const std::string& id, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("get_problem: nu must be positive");
  ProblemSpec p;
  if (id == "vortex2d") p = vortex2d(nu);
  else if (id == "cube3d") p = cube3d(nu);
  else if (id == "lshape3d") p = lshape3d(nu);
  else throw std::invalid_argument("get_problem: unknown problem '" + id + "'");
  p.nu = nu;
  const VectorField lap = p.laplacian_u;
  const VectorField gp = p.grad_p;
  p.f = [lap, gp, nu](const Vec3& x) -> Vec3 { return -nu * lap(x) + gp(x); };
  p.g = p.u;
  return p;
}

std::vector<std::string> problem_ids() { return {"vortex2d", "cube3d", "lshape3d"}; }

}  // namespace egstokes
