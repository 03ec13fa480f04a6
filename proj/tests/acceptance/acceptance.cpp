// Acceptance checks for the EG Stokes solvers. One PASS/FAIL line per
// criterion, followed by indented detail lines.
//
// Usage: acceptance [--only=1,5] [--known-deviations=5,7,8]
// Exit status is nonzero when any criterion fails that is not listed as a
// known deviation. Known deviations still print FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "../unit/oracles.hpp"
#include "egstokes/analysis.hpp"
#include "egstokes/experiments.hpp"
#include "egstokes/problems.hpp"
#include "egstokes/solver.hpp"
#include "egstokes/system.hpp"

using namespace egstokes;
using Eigen::MatrixXd;

namespace {

// Pinned tolerances.
constexpr double kRateVelocityLo = 0.85, kRateVelocityHi = 1.25;
constexpr double kRatePressureLo = 0.9, kRatePressureHi = 1.1;
constexpr double kMagnitudeFactor = 2.0;
constexpr double kRobustRelTol = 1e-8;
constexpr double kRatioLo = 50.0, kRatioHi = 200.0;
constexpr double kBEquivTol = 1e-12;
constexpr double kDivTol = 1e-9;
constexpr double kDivSolverTol = 1e-10;
constexpr double kCondensedTol = 1e-10;
constexpr double kSchurTol = 1e-12;
constexpr double kKappaRelTol = 5e-7;  // six significant digits
constexpr double kKappaFactor = 2.0;
constexpr double kIterSpread = 2.0;
constexpr double kIterFactor = 1.5;
constexpr double kReduction2d = 0.33, kReduction2dTol = 0.02;
constexpr double kReduction3d = 0.38, kReduction3dTol = 0.03;
constexpr double kSpectralSpread = 0.10;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
  void note(const std::string& what) { details.push_back("      " + what); }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

bool within_factor(double x, double ref, double factor) { return x <= factor * ref && x >= ref / factor; }

struct Case {
  ProblemSpec problem;
  Discretization d;
};

Case make_case(const std::string& id, int n, double nu) {
  ProblemSpec p = get_problem(id, nu);
  Discretization d = discretize(p.build_mesh(n), p.f, p.g, nu, p.rho);
  return {std::move(p), std::move(d)};
}

StokesSystem system_of(Method m, const Case& c) { return build_system(m, c.d.blocks, c.d.mesh.volumes()); }

ErrorReport errors_of(const Case& c, const StokesSystem& s, const Vec& x) {
  return compute_errors(c.d.mesh, c.d.layout, c.problem, expand_solution(s, x), c.problem.rho);
}

// 1. Convergence rates and magnitudes on the 2D vortex.
Outcome convergence() {
  Outcome o;
  const std::vector<int> ns{4, 8, 16, 32, 64};
  const std::vector<double> ref_u{2.200e-1, 1.060e-1, 4.920e-2, 2.372e-2, 1.166e-2};
  const std::vector<double> ref_p{9.547e-1, 4.802e-1, 2.404e-1, 1.203e-1, 6.014e-2};
  std::vector<double> eu, ep, h;
  for (int n : ns) {
    const Case c = make_case("vortex2d", n, 1e-6);
    const StokesSystem s = system_of(Method::pr, c);
    const ErrorReport e = errors_of(c, s, solve_direct(s));
    eu.push_back(e.velocity_energy);
    ep.push_back(e.pressure_l2);
    h.push_back(1.0 / n);
  }
  const auto ru = eoc(eu, h), rp = eoc(ep, h);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    o.note(fmt("h=1/%-2d  |u-u_h|_E=%.4e (ref %.3e, x%.2f)  |p-p_h|=%.4e (ref %.3e, x%.2f)", ns[i], eu[i], ref_u[i],
               eu[i] / ref_u[i], ep[i], ref_p[i], ep[i] / ref_p[i]));
  }
  for (std::size_t i = ru.size() - 2; i < ru.size(); ++i) {
    o.check(ru[i] >= kRateVelocityLo && ru[i] <= kRateVelocityHi,
            fmt("velocity EOC h=1/%d: %.3f in [%.2f, %.2f]", ns[i + 1], ru[i], kRateVelocityLo, kRateVelocityHi));
    o.check(rp[i] >= kRatePressureLo && rp[i] <= kRatePressureHi,
            fmt("pressure EOC h=1/%d: %.3f in [%.2f, %.2f]", ns[i + 1], rp[i], kRatePressureLo, kRatePressureHi));
  }
  bool mag = true;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    mag = mag && within_factor(eu[i], ref_u[i], kMagnitudeFactor) && within_factor(ep[i], ref_p[i], kMagnitudeFactor);
  }
  o.check(mag, fmt("all magnitudes within x%.0f of the reference table", kMagnitudeFactor));
  return o;
}

// 2. Pressure robustness at h = 1/32.
Outcome robustness() {
  Outcome o;
  const std::vector<double> nus{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> pr_u, pr_aux, st_u;
  for (double nu : nus) {
    const Case c = make_case("vortex2d", 32, nu);
    for (Method m : {Method::st, Method::pr}) {
      const StokesSystem s = system_of(m, c);
      const ErrorReport e = errors_of(c, s, solve_direct(s));
      if (m == Method::pr) {
        pr_u.push_back(e.velocity_energy);
        pr_aux.push_back(e.pressure_auxiliary);
      } else {
        st_u.push_back(e.velocity_energy);
      }
    }
    o.note(fmt("nu=%.0e  ST |u-u_h|_E=%.4e  PR |u-u_h|_E=%.10e  PR |P0p-p_h|=%.4e", nu, st_u.back(), pr_u.back(),
               pr_aux.back()));
  }
  double spread = 0.0;
  for (double e : pr_u) spread = std::max(spread, std::abs(e - pr_u[0]) / pr_u[0]);
  o.check(spread <= kRobustRelTol, fmt("PR velocity error spread %.2e <= %.0e", spread, kRobustRelTol));
  const double st_ratio = st_u[4] / st_u[2];
  o.check(st_ratio >= kRatioLo && st_ratio <= kRatioHi,
          fmt("ST velocity error ratio nu=1e-6 : nu=1e-4 = %.2f in [%.0f, %.0f]", st_ratio, kRatioLo, kRatioHi));
  const double aux_ratio = pr_aux[2] / pr_aux[4];
  o.check(aux_ratio >= kRatioLo && aux_ratio <= kRatioHi,
          fmt("PR auxiliary pressure ratio nu=1e-4 : nu=1e-6 = %.2f in [%.0f, %.0f]", aux_ratio, kRatioLo, kRatioHi));
  return o;
}

// 3. ST-EG and PR-EG share the matrix and differ in the load.
Outcome operator_identity() {
  Outcome o;
  for (const auto& [id, n] : std::vector<std::pair<std::string, int>>{{"vortex2d", 8}, {"cube3d", 2}, {"lshape3d", 2}}) {
    const Case c = make_case(id, n, 1e-3);
    const StokesSystem st = system_of(Method::st, c), pr = system_of(Method::pr, c);
    const SpMat diff = st.matrix - pr.matrix;
    double max_diff = 0.0;
    for (Index k = 0; k < diff.outerSize(); ++k)
      for (SpMat::InnerIterator it(diff, k); it; ++it) max_diff = std::max(max_diff, std::abs(it.value()));
    o.check(max_diff == 0.0 && st.matrix.nonZeros() == pr.matrix.nonZeros(),
            fmt("%s n=%d: matrices identical (max |diff| = %g)", id.c_str(), n, max_diff));
    const double rhs_diff = (st.rhs - pr.rhs).norm();
    o.check(rhs_diff > 0.0, fmt("%s n=%d: right-hand sides differ (|diff| = %.3e)", id.c_str(), n, rhs_diff));
  }
  return o;
}

// 4. Jump form of b equals (div R w, q) on every row that strong elimination keeps.
Outcome b_equivalence() {
  Outcome o;
  o.note("boundary continuous rows are eliminated strongly and excluded from the comparison");
  const std::vector<std::pair<int, int>> cases{{2, 2}, {2, 8}, {3, 2}, {3, 4}};
  for (const auto& [dim, n] : cases) {
    const SimplicialMesh m = dim == 2 ? build_unit_square_mesh(n) : build_unit_cube_mesh(n);
    const DofLayout L(m);
    const CouplingBlocks bj = assemble_b(m, L), br = assemble_b_reconstructed(m, L);
    std::vector<bool> fixed(L.num_continuous(), false);
    for (Index pos : L.boundary_continuous_dofs()) fixed[pos] = true;
    const SpMat dD = bj.D - br.D;
    SpMat dC = bj.C - br.C;
    double max_kept = 0.0, max_bnd = 0.0, scale = 0.0;
    for (Index k = 0; k < dD.outerSize(); ++k)
      for (SpMat::InnerIterator it(dD, k); it; ++it) max_kept = std::max(max_kept, std::abs(it.value()));
    for (Index k = 0; k < dC.outerSize(); ++k)
      for (SpMat::InnerIterator it(dC, k); it; ++it) {
        double& slot = fixed[it.row()] ? max_bnd : max_kept;
        slot = std::max(slot, std::abs(it.value()));
      }
    for (const SpMat* M : {&bj.D, &bj.C})
      for (Index k = 0; k < M->outerSize(); ++k)
        for (SpMat::InnerIterator it(*M, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    o.check(max_kept <= kBEquivTol,
            fmt("%dD n=%d: max |G_jump - G_R| = %.2e (entries up to %.2e; eliminated rows differ by %.2e)", dim, n,
                max_kept, scale, max_bnd));
  }
  return o;
}

// 5. Divergence of the reconstructed PR-EG velocity after an iterative solve.
Outcome divergence_free() {
  Outcome o;
  for (int n : {8, 16}) {
    const Case c = make_case("vortex2d", n, 1e-6);
    const StokesSystem s = system_of(Method::pr, c);
    KrylovOptions opt;
    opt.rel_tol = kDivSolverTol;
    const KrylovResult r = solve_iterative(s, PrecondKind::upper, Fidelity::exact, opt);
    const ReconstructedField rf = reconstruct(c.d.mesh, c.d.layout, r.x.head(c.d.layout.num_velocity()));
    const double div = divergence_report(rf, c.d.mesh).max_abs;
    o.check(r.report.converged && div <= kDivTol,
            fmt("h=1/%d: GMRES %d its, residual %.1e, max_K |div R u_h| = %.2e <= %.0e", n, r.report.iterations,
                r.report.relative_residual, div, kDivTol));
    // |K| div R u_h equals the continuity residual on K, since g = 0 here.
    const Vec res = (s.rhs - s.matrix * r.x).tail(s.n_pressure);
    const Vec per = divergence_report(rf, c.d.mesh).per_element;
    double gap = 0.0;
    for (Index k = 0; k < c.d.mesh.num_elements(); ++k)
      gap = std::max(gap, std::abs(std::abs(per[k]) * c.d.mesh.volume(k) - std::abs(res[k])));
    o.note(fmt("max_K | |K| |div R u_h| - |continuity residual_K| | = %.1e", gap));
    const Vec xd = solve_direct(s);
    const double div_direct =
        divergence_report(reconstruct(c.d.mesh, c.d.layout, xd.head(c.d.layout.num_velocity())), c.d.mesh).max_abs;
    o.note(fmt("direct solve: max_K |div R u_h| = %.2e", div_direct));
  }
  return o;
}

// 6. Static condensation reproduces the perturbed solution.
Outcome condensation() {
  Outcome o;
  for (const auto& [id, n] : std::vector<std::pair<std::string, int>>{{"vortex2d", 4}, {"cube3d", 2}}) {
    const Case c = make_case(id, n, 1e-2);
    const StokesSystem ppr = system_of(Method::ppr, c), cpr = system_of(Method::cpr, c);
    const Vec x_ppr = solve_direct(ppr);
    const Vec x_cpr = expand_solution(cpr, solve_direct(cpr));
    const double rel = (x_ppr - x_cpr).norm() / x_ppr.norm();
    o.check(rel <= kCondensedTol, fmt("%s n=%d: |x_CPR - x_PPR| / |x_PPR| = %.2e", id.c_str(), n, rel));
  }
  const Case c = make_case("vortex2d", 2, 1.0);
  const StokesSystem ppr = system_of(Method::ppr, c), cpr = system_of(Method::cpr, c);
  const Index nD = c.d.layout.num_enrichment(), m = ppr.matrix.rows() - nD;
  const MatrixXd K(ppr.matrix);
  const MatrixXd Dinv = K.topLeftCorner(nD, nD).diagonal().cwiseInverse().asDiagonal();
  const MatrixXd S = K.bottomRightCorner(m, m) - K.bottomLeftCorner(m, nD) * Dinv * K.topRightCorner(nD, m);
  const double err = (MatrixXd(cpr.matrix) - S).cwiseAbs().maxCoeff() / S.cwiseAbs().maxCoeff();
  o.check(err <= kSchurTol, fmt("2D n=2: A^E vs dense Schur complement, max rel diff %.2e", err));
  return o;
}

const std::vector<double> kNus{1.0, 1e-2, 1e-4, 1e-6};
const std::vector<Method> kPrecondMethods{Method::pr, Method::ppr, Method::cpr};

// 7. Condition numbers with the exact block-diagonal preconditioners.
Outcome condition_numbers() {
  Outcome o;
  const double ref[3] = {41.267, 99.563, 62.445};
  double kappa[3][4];
  for (std::size_t j = 0; j < kNus.size(); ++j) {
    const Case c = make_case("cube3d", 4, kNus[j]);
    for (int i = 0; i < 3; ++i) kappa[i][j] = condition_number(system_of(kPrecondMethods[i], c));
  }
  for (int i = 0; i < 3; ++i) {
    double spread = 0.0;
    for (int j = 0; j < 4; ++j) spread = std::max(spread, std::abs(kappa[i][j] - kappa[i][0]) / kappa[i][0]);
    o.check(spread <= kKappaRelTol, fmt("%-6s kappa = %.6f %.6f %.6f %.6f (spread %.1e)",
                                        method_name(kPrecondMethods[i]).c_str(), kappa[i][0], kappa[i][1],
                                        kappa[i][2], kappa[i][3], spread));
  }
  o.check(kappa[1][0] > kappa[0][0], fmt("kappa(PPR-EG) = %.3f > kappa(PR-EG) = %.3f", kappa[1][0], kappa[0][0]));
  for (int i = 0; i < 3; ++i) {
    o.check(within_factor(kappa[i][0], ref[i], kKappaFactor),
            fmt("%-6s kappa %.3f within x%.0f of %.3f (ratio %.2f)", method_name(kPrecondMethods[i]).c_str(),
                kappa[i][0], kKappaFactor, ref[i], kappa[i][0] / ref[i]));
  }
  return o;
}

// 8. Exact-preconditioner GMRES iteration counts on the cube.
Outcome iteration_counts() {
  Outcome o;
  // Rows nu = 1, 1e-2, 1e-4, 1e-6; columns PR, PPR, CPR x (diag, lower, upper).
  const int ref[4][9] = {{43, 23, 21, 62, 34, 32, 30, 20, 18},
                         {61, 33, 33, 87, 49, 49, 45, 27, 28},
                         {71, 39, 39, 89, 52, 52, 39, 25, 25},
                         {72, 40, 40, 91, 55, 55, 36, 25, 25}};
  const PrecondKind kinds[3] = {PrecondKind::diagonal, PrecondKind::lower, PrecondKind::upper};
  int its[4][9];
  bool all_converged = true;
  for (std::size_t j = 0; j < kNus.size(); ++j) {
    const Case c = make_case("cube3d", 4, kNus[j]);
    for (int m = 0; m < 3; ++m) {
      const StokesSystem s = system_of(kPrecondMethods[m], c);
      for (int k = 0; k < 3; ++k) {
        const KrylovResult r = solve_iterative(s, kinds[k], Fidelity::exact);
        all_converged = all_converged && r.report.converged;
        its[j][3 * m + k] = r.report.iterations;
      }
    }
    std::string row = fmt("nu=%.0e ", kNus[j]);
    for (int col = 0; col < 9; ++col) row += fmt(" %3d(%2d)", its[j][col], ref[j][col]);
    o.note(row);
  }
  o.check(all_converged, "all 36 solves converged within 500 iterations");
  bool spread_ok = true, order_ok = true;
  std::vector<std::string> off;
  for (int col = 0; col < 9; ++col) {
    int lo = its[0][col], hi = its[0][col];
    for (int j = 0; j < 4; ++j) {
      lo = std::min(lo, its[j][col]);
      hi = std::max(hi, its[j][col]);
      if (!within_factor(its[j][col], ref[j][col], kIterFactor)) {
        off.push_back(fmt("%s/%s nu=%.0e: %d vs %d", method_key(kPrecondMethods[col / 3]).c_str(),
                          to_string(kinds[col % 3]).c_str(), kNus[j], its[j][col], ref[j][col]));
      }
    }
    spread_ok = spread_ok && hi <= kIterSpread * lo;
  }
  for (int j = 0; j < 4; ++j)
    for (int m = 0; m < 3; ++m) order_ok = order_ok && its[j][3 * m + 1] <= its[j][3 * m] && its[j][3 * m + 2] <= its[j][3 * m];
  o.check(spread_ok, fmt("max/min across nu <= %.1f in every column", kIterSpread));
  o.check(order_ok, "triangular <= diagonal in every row");
  o.check(off.empty(), fmt("all counts within x%.1f of the reference table (%zu outside)", kIterFactor, off.size()));
  for (const auto& s : off) o.note("outside: " + s);
  return o;
}

// 9. Size reduction of the condensed system.
Outcome dof_reduction() {
  Outcome o;
  for (const auto& [id, n, target, tol] : std::vector<std::tuple<std::string, int, double, double>>{
           {"vortex2d", 32, kReduction2d, kReduction2dTol}, {"cube3d", 16, kReduction3d, kReduction3dTol}}) {
    const ProblemSpec p = get_problem(id, 1.0);
    const SimplicialMesh m = p.build_mesh(n);
    const DofLayout L(m);
    const double full = double(L.num_total());
    const double condensed = double(L.num_continuous() + L.num_pressure());
    const double red = 1.0 - condensed / full;
    o.check(std::abs(red - target) <= tol, fmt("%s n=%d: %d -> %d DoFs, reduction %.2f%% (target %.0f%% +/- %.0f%%)",
                                               id.c_str(), n, L.num_total(), int(condensed), 100 * red, 100 * target,
                                               100 * tol));
  }
  return o;
}

// 10. (A_DD, D_DD) spectral equivalence.
Outcome spectral_equivalence() {
  Outcome o;
  std::vector<double> lo, hi;
  for (int n : {2, 4, 8}) {
    const SimplicialMesh m = build_unit_square_mesh(n);
    const DofLayout L(m);
    const MatrixXd A(assemble_a(m, L, 1.0, 10.0).DD);
    const MatrixXd D = A.diagonal().asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(A, D, Eigen::EigenvaluesOnly);
    lo.push_back(es.eigenvalues().minCoeff());
    hi.push_back(es.eigenvalues().maxCoeff());
    o.note(fmt("n=%d: lambda in [%.6f, %.6f]", n, lo.back(), hi.back()));
  }
  auto spread = [](const std::vector<double>& v) {
    const auto [a, b] = std::minmax_element(v.begin(), v.end());
    return (*b - *a) / *a;
  };
  o.check(lo[0] > 0.0, "A_DD positive definite");
  o.check(spread(lo) < kSpectralSpread, fmt("lower endpoint varies by %.2f%% < %.0f%%", 100 * spread(lo), 100 * kSpectralSpread));
  o.check(spread(hi) < kSpectralSpread, fmt("upper endpoint varies by %.2f%% < %.0f%%", 100 * spread(hi), 100 * kSpectralSpread));
  return o;
}

// 11. Property suite, no iterative solver involved.
Outcome properties() {
  Outcome o;
  // Mesh invariants.
  bool mesh_ok = true;
  for (const SimplicialMesh& m : {build_unit_square_mesh(4), build_unit_cube_mesh(3), build_lshape_cylinder_mesh(2)}) {
    double vol = 0.0;
    for (Index k = 0; k < m.num_elements(); ++k) {
      mesh_ok = mesh_ok && m.volume(k) > 0.0;
      vol += m.volume(k);
    }
    const double expected = m.num_elements() == 36 ? 0.75 : 1.0;
    mesh_ok = mesh_ok && std::abs(vol - expected) < 1e-12;
    for (Index fi = 0; fi < m.num_facets(); ++fi) {
      const Facet& f = m.facet(fi);
      mesh_ok = mesh_ok && std::abs(f.normal.norm() - 1.0) < 1e-14 && m.element_facet(f.plus, f.plus_local) == fi;
      if (f.is_boundary()) {
        mesh_ok = mesh_ok && f.normal.dot(f.centroid - m.centroid(f.plus)) > 0.0;
      } else {
        mesh_ok = mesh_ok && m.element_facet(f.minus, f.minus_local) == fi &&
                  f.normal.dot(m.centroid(f.minus) - m.centroid(f.plus)) > 0.0;
      }
    }
  }
  o.check(mesh_ok, "mesh invariants: positive volumes summing to |Omega|, unit normals K+ -> K-, facet pairing");

  // Quadrature exactness on monomials of the rule's degree.
  bool quad_ok = true;
  for (int dim = 1; dim <= 3; ++dim) {
    for (int deg = 1; deg <= 5; ++deg) {
      const QuadratureRule& q = quadrature_rule(dim, deg);
      // x_1^deg has mean deg! dim! / (deg + dim)!.
      double exact = 1.0;
      for (int i = 1; i <= dim; ++i) exact *= double(i) / double(deg + i);
      double s = 0.0;
      for (std::size_t p = 0; p < q.size(); ++p) s += q.weights[p] * std::pow(q.points[p][1], deg);
      quad_ok = quad_ok && std::abs(s - exact) < 1e-14;
    }
  }
  o.check(quad_ok, "quadrature exact for x^k, k <= degree, in 1D/2D/3D");

  // Partition of unity and enrichment mean zero.
  bool pou = true, mean_zero = true;
  const SimplicialMesh cube = build_unit_cube_mesh(2);
  const QuadratureRule& q2 = quadrature_rule(3, 2);
  for (Index k = 0; k < cube.num_elements(); ++k) {
    std::array<Vec3, 4> c;
    for (int i = 0; i < 4; ++i) c[i] = cube.vertex(cube.element(k)[i]);
    Vec3 mean = Vec3::Zero();
    for (std::size_t p = 0; p < q2.size(); ++p) {
      const Vec3 x = barycentric_to_point(q2.points[p], c);
      const P1Values v = eval_p1_basis(cube, k, x);
      pou = pou && std::abs(v.values[0] + v.values[1] + v.values[2] + v.values[3] - 1.0) < 1e-14;
      mean += q2.weights[p] * eval_enrichment(cube, k, x).value;
    }
    mean_zero = mean_zero && mean.norm() < 1e-15;
  }
  o.check(pou, "P1 basis sums to one");
  o.check(mean_zero, "enrichment basis has zero element mean");

  // Gauge projection is idempotent.
  const SimplicialMesh sq = build_unit_square_mesh(4);
  Vec x(10 + sq.num_elements());
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (Index i = 0; i < x.size(); ++i) x[i] = u(rng);
  project_pressure_mean(x, 10, sq.volumes());
  Vec y = x;
  project_pressure_mean(y, 10, sq.volumes());
  o.check((x - y).norm() < 1e-15, "pressure mean projection is idempotent");

  // a(.,.) against brute-force quadrature on n = 2.
  for (int dim : {2, 3}) {
    const SimplicialMesh m = dim == 2 ? build_unit_square_mesh(2) : build_unit_cube_mesh(2);
    const DofLayout L(m);
    const double rho = dim == 2 ? 10.0 : 2.0;
    const MatrixXd A = oracle::velocity_matrix(assemble_a(m, L, 1.0, rho));
    const MatrixXd ref = oracle::dense_a(m, L, 1.0, rho);
    const double err = (A - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
    o.check(err < 1e-12, fmt("%dD n=2: assembled a(.,.) vs brute-force quadrature, max rel diff %.1e", dim, err));
  }
  return o;
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--only=", 0) == 0) only = parse_list(a.substr(7));
    else if (a.rfind("--known-deviations=", 0) == 0) known = parse_list(a.substr(19));
    else {
      std::fprintf(stderr, "usage: %s [--only=LIST] [--known-deviations=LIST]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"convergence rates, vortex2d PR-EG", convergence},
      {"pressure robustness, vortex2d h=1/32", robustness},
      {"ST-EG / PR-EG operator identity", operator_identity},
      {"b-form equivalence with reconstruction", b_equivalence},
      {"divergence-free reconstruction", divergence_free},
      {"static condensation exactness", condensation},
      {"condition numbers, cube3d h=1/4", condition_numbers},
      {"preconditioned iteration counts, cube3d h=1/4", iteration_counts},
      {"DoF reduction of CPR-EG", dof_reduction},
      {"spectral equivalence of A_DD and D_DD", spectral_equivalence},
      {"property suite", properties},
  };

  int failed = 0, unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool tolerated = !o.pass && known.count(id);
    std::printf("[%s] criterion %2d: %s (%.1f s)%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), secs,
                tolerated ? "  [known deviation]" : "");
    for (const auto& d : o.details) std::printf("        %s\n", d.c_str());
    std::fflush(stdout);
    if (!o.pass) {
      ++failed;
      if (!tolerated) ++unexpected;
    }
  }
  std::printf("%d criteria failed, %d of them not listed as known deviations\n", failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
