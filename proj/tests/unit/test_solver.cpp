#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "egstokes/amg.hpp"
#include "egstokes/problems.hpp"
#include "egstokes/solver.hpp"

using namespace egstokes;
using Eigen::MatrixXd;

namespace {

StokesSystem make(Method m, const std::string& id, int n, double nu) {
  const ProblemSpec p = get_problem(id, nu);
  const Discretization d = discretize(p.build_mesh(n), p.f, p.g, nu, p.rho);
  return build_system(m, d.blocks, d.mesh.volumes());
}

MatrixXd random_spd(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  MatrixXd X(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = g(rng);
  return X * X.transpose() + n * MatrixXd::Identity(n, n);
}

LinearOperator dense_op(const MatrixXd& A) {
  return [A](const Vec& x) -> Vec { return A * x; };
}

Vec random_vec(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

TEST(Solver, TrivialSystemsConvergeInOneStep) {
  const Vec b = random_vec(20, 1);
  const KrylovResult r = gmres(identity_operator(), identity_operator(), b);
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 1);
  EXPECT_LT((r.x - b).norm(), 1e-14);

  Vec d(20);
  for (int i = 0; i < 20; ++i) d[i] = 1.0 + i;
  const MatrixXd D = d.asDiagonal();
  const LinearOperator Dinv = dense_op(d.cwiseInverse().asDiagonal());
  for (const KrylovResult& k : {gmres(dense_op(D), Dinv, b), minres(dense_op(D), Dinv, b), cg(dense_op(D), Dinv, b)}) {
    EXPECT_TRUE(k.report.converged);
    EXPECT_EQ(k.report.iterations, 1);
    EXPECT_LT((D * k.x - b).norm(), 1e-13 * b.norm());
  }
  const KrylovResult z = gmres(dense_op(D), Dinv, Vec::Zero(20));
  EXPECT_TRUE(z.report.converged);
  EXPECT_EQ(z.x.norm(), 0.0);
}

TEST(Solver, UnpreconditionedKrylovOnSpd) {
  const MatrixXd A = random_spd(30, 2);
  const Vec b = random_vec(30, 3);
  const Vec exact = A.llt().solve(b);
  KrylovOptions opt;
  opt.rel_tol = 1e-12;
  for (const KrylovResult& k : {gmres(dense_op(A), identity_operator(), b, opt),
                                minres(dense_op(A), identity_operator(), b, opt),
                                cg(dense_op(A), identity_operator(), b, opt)}) {
    EXPECT_TRUE(k.report.converged);
    EXPECT_LE(k.report.iterations, 30);
    EXPECT_LT((k.x - exact).norm(), 1e-9 * exact.norm());
    EXPECT_EQ(k.report.residual_history.size(), std::size_t(k.report.iterations + 1));
  }
  // Exact preconditioner: MINRES needs at most two steps.
  const MatrixXd Ainv = A.inverse();
  EXPECT_LE(minres(dense_op(A), dense_op(Ainv), b, opt).report.iterations, 2);
}

TEST(Solver, MinresWithExactSchurTakesThreeSteps) {
  const int n = 12, m = 5;
  const MatrixXd A = random_spd(n, 4);
  MatrixXd G(n, m);
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) G(i, j) = g(rng);
  MatrixXd K = MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = A;
  K.topRightCorner(n, m) = G;
  K.bottomLeftCorner(m, n) = G.transpose();
  const MatrixXd S = G.transpose() * A.llt().solve(G);
  MatrixXd P = MatrixXd::Zero(n + m, n + m);
  P.topLeftCorner(n, n) = A.inverse();
  P.bottomRightCorner(m, m) = S.inverse();
  const Vec b = random_vec(n + m, 5);
  KrylovOptions opt;
  opt.rel_tol = 1e-10;
  const KrylovResult r = minres(dense_op(K), dense_op(P), b, opt);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.iterations, 3);
  EXPECT_LT((K * r.x - b).norm(), 1e-8 * b.norm());
  const KrylovResult q = gmres(dense_op(K), dense_op(P), b, opt);
  EXPECT_LE(q.report.iterations, 3);
  EXPECT_LT((q.x - r.x).norm(), 1e-8 * r.x.norm());
}

TEST(Solver, GmresStopsOnTrueResidualAndRespectsMaxIter) {
  const MatrixXd A = random_spd(40, 6) + MatrixXd::Identity(40, 40) * 0.0;
  const Vec b = random_vec(40, 7);
  KrylovOptions opt;
  opt.rel_tol = 1e-8;
  const KrylovResult r = gmres(dense_op(A), identity_operator(), b, opt);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.relative_residual, 1e-8);
  EXPECT_NEAR(r.report.relative_residual, (b - A * r.x).norm() / b.norm(), 1e-15);
  opt.max_iter = 3;
  const KrylovResult s = gmres(dense_op(A), identity_operator(), b, opt);
  EXPECT_FALSE(s.report.converged);
  EXPECT_EQ(s.report.iterations, 3);
  opt.max_iter = 500;
  opt.restart = 5;
  const KrylovResult t = gmres(dense_op(A), identity_operator(), b, opt);
  EXPECT_TRUE(t.report.converged);
  EXPECT_LE(t.report.relative_residual, 1e-8);
}

TEST(Solver, BlockPreconditionersMatchDenseFormulas) {
  for (Method meth : {Method::pr, Method::cpr}) {
    const StokesSystem s = make(meth, "vortex2d", 2, 1e-2);
    const Index nu = s.n_velocity, np = s.n_pressure;
    const MatrixXd A(s.A_u), G(s.G), M(s.M_p);
    MatrixXd S = M / s.nu;
    if (meth == Method::cpr) S -= MatrixXd(s.C);
    EXPECT_LT((MatrixXd(pressure_schur_block(s)) - S).cwiseAbs().maxCoeff(), 1e-12 * S.cwiseAbs().maxCoeff());
    const MatrixXd Ai = A.inverse(), Si = S.inverse();
    const Vec r = random_vec(nu + np, 8);
    const Vec ru = r.head(nu), rp = r.tail(np);
    Vec diag(nu + np), lower(nu + np), upper(nu + np);
    diag << Ai * ru, Si * rp;
    lower << Ai * ru, Si * (rp - G.transpose() * (Ai * ru));
    const Vec zp = Si * rp;
    upper << Ai * (ru - G * zp), zp;
    const std::pair<PrecondKind, Vec> cases[] = {
        {PrecondKind::diagonal, diag}, {PrecondKind::lower, lower}, {PrecondKind::upper, upper}};
    for (const auto& [kind, expected] : cases) {
      const BlockPreconditioner P(kind, Fidelity::exact, s);
      EXPECT_LT((P.apply(r) - expected).norm(), 1e-10 * expected.norm()) << to_string(kind);
      EXPECT_EQ(P.variant(), variant_of(meth));
    }
  }
}

TEST(Solver, PressureBlockScalesInverselyWithNu) {
  const StokesSystem a = make(Method::pr, "vortex2d", 4, 1.0), b = make(Method::pr, "vortex2d", 4, 1e-3);
  const MatrixXd Sa(pressure_schur_block(a)), Sb(pressure_schur_block(b));
  EXPECT_LT((Sb - 1e3 * Sa).cwiseAbs().maxCoeff(), 1e-9 * Sb.cwiseAbs().maxCoeff());
  EXPECT_EQ(variant_of(Method::st), PrecondVariant::full);
  EXPECT_EQ(variant_of(Method::ppr), PrecondVariant::perturbed);
  EXPECT_EQ(variant_of(Method::cpr), PrecondVariant::condensed);
}

TEST(Solver, InnerSolvers) {
  const StokesSystem s = make(Method::pr, "cube3d", 4, 1.0);
  const Vec b = random_vec(s.n_velocity, 10);
  const auto exact = make_direct_solver(s.A_u);
  EXPECT_LE((b - s.A_u * exact->solve(b)).norm(), 1e-12 * b.norm());
  const auto amg = make_amg_cg_solver(s.A_u, 1e-6);
  const Vec x = amg->solve(b);
  EXPECT_LE((b - s.A_u * x).norm(), 1e-6 * b.norm());
  EXPECT_EQ(amg->stats().applications, 1);
  EXPECT_GE(amg->stats().max_iterations, 1);
  const auto jac = make_jacobi_cg_solver(s.M_p, 1e-6);
  const Vec bp = random_vec(s.n_pressure, 11);
  EXPECT_LE((bp - s.M_p * jac->solve(bp)).norm(), 1e-6 * bp.norm());
  SpMat indefinite = s.A_u;
  indefinite.coeffRef(0, 0) = -1.0;
  EXPECT_THROW(make_direct_solver(indefinite), std::invalid_argument);
}

TEST(Solver, AmgHierarchy) {
  const StokesSystem s = make(Method::pr, "cube3d", 4, 1.0);
  const SmoothedAggregationAmg amg(s.A_u);
  const auto sizes = amg.level_sizes();
  ASSERT_GE(sizes.size(), 2u);
  EXPECT_EQ(sizes.front(), s.n_velocity);
  for (std::size_t l = 1; l < sizes.size(); ++l) EXPECT_LT(sizes[l], sizes[l - 1]);
  EXPECT_GT(amg.operator_complexity(), 1.0);
  EXPECT_LT(amg.operator_complexity(), 3.0);
  // A stationary V-cycle iteration contracts.
  const Vec b = random_vec(s.n_velocity, 12);
  Vec x = Vec::Zero(b.size());
  double prev = b.norm();
  for (int it = 0; it < 5; ++it) {
    x += amg.vcycle(b - s.A_u * x);
    const double r = (b - s.A_u * x).norm();
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(Solver, IterativeSolveMatchesDirect) {
  for (Method meth : {Method::pr, Method::ppr, Method::cpr}) {
    const StokesSystem s = make(meth, "vortex2d", 4, 1e-2);
    const Vec direct = solve_direct(s);
    KrylovOptions opt;
    opt.rel_tol = 1e-10;
    for (PrecondKind kind : {PrecondKind::diagonal, PrecondKind::lower, PrecondKind::upper}) {
      const KrylovResult r = solve_iterative(s, kind, Fidelity::exact, opt);
      EXPECT_TRUE(r.report.converged);
      EXPECT_LT((r.x - direct).norm(), 1e-7 * direct.norm()) << method_name(meth) << " " << to_string(kind);
    }
    const KrylovResult m = solve_iterative(s, PrecondKind::diagonal, Fidelity::exact, opt, KrylovMethod::minres);
    EXPECT_TRUE(m.report.converged);
    EXPECT_LT((m.x - direct).norm(), 1e-6 * direct.norm()) << method_name(meth);
  }
}

TEST(Solver, InexactInnerIterationCounts) {
  const StokesSystem s = make(Method::pr, "cube3d", 4, 1.0);
  const KrylovResult r = solve_iterative(s, PrecondKind::upper, Fidelity::inexact);
  EXPECT_TRUE(r.report.converged);
  EXPECT_GE(r.report.velocity_inner.mean(), 3.0);
  EXPECT_LE(r.report.velocity_inner.mean(), 15.0);
}

TEST(Solver, DiagonalPreconditionedIterationsNearReference) {
  // Reference count 71 for the exact block-diagonal preconditioner at nu = 1e-4.
  const StokesSystem s = make(Method::pr, "cube3d", 4, 1e-4);
  const KrylovResult r = solve_iterative(s, PrecondKind::diagonal, Fidelity::exact);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.iterations, 1.5 * 71);
  EXPECT_GE(r.report.iterations, 71 / 1.5);
}

TEST(Solver, ConditionNumberMatchesDenseOracle) {
  const StokesSystem s = make(Method::pr, "vortex2d", 4, 1.0);
  std::vector<bool> fixed(s.matrix.rows(), false);
  for (Index r : s.fixed_velocity) fixed[r] = true;
  std::vector<Index> keep;
  for (Index i = 0; i < s.matrix.rows(); ++i)
    if (!fixed[i]) keep.push_back(i);
  const MatrixXd K(s.matrix);
  MatrixXd B = MatrixXd::Zero(K.rows(), K.cols());
  B.topLeftCorner(s.n_velocity, s.n_velocity) = MatrixXd(s.A_u);
  B.bottomRightCorner(s.n_pressure, s.n_pressure) = MatrixXd(s.M_p) / s.nu;
  const Index m = static_cast<Index>(keep.size());
  MatrixXd Kr(m, m), Br(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      Kr(i, j) = K(keep[i], keep[j]);
      Br(i, j) = B(keep[i], keep[j]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(Kr, Br);
  Vec lam = es.eigenvalues().cwiseAbs();
  std::sort(lam.data(), lam.data() + m);
  const double kappa = lam[m - 1] / lam[1];
  EXPECT_LT(lam[0], 1e-10);
  EXPECT_NEAR(condition_number(s), kappa, 1e-8 * kappa);

  const StokesSystem t = make(Method::pr, "vortex2d", 4, 1e-5);
  EXPECT_NEAR(condition_number(t), kappa, 1e-6 * kappa);
  EXPECT_THROW(condition_number(s, 10), std::length_error);
}

TEST(Solver, ResidualHistoryFile) {
  SolveReport rep;
  rep.residual_history = {1.0, 0.5, 1e-9};
  const std::string path = ::testing::TempDir() + "hist.csv";
  write_residual_history(rep, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,relative_residual");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
  std::remove(path.c_str());
}

TEST(Solver, ParseNames) {
  EXPECT_EQ(parse_fidelity("inexact"), Fidelity::inexact);
  EXPECT_EQ(parse_precond_kind("lower"), PrecondKind::lower);
  EXPECT_EQ(to_string(PrecondKind::upper), "upper");
  EXPECT_EQ(parse_precond_kind("diag"), PrecondKind::diagonal);
  EXPECT_THROW(parse_precond_kind("block"), std::invalid_argument);
  EXPECT_THROW(parse_fidelity("approx"), std::invalid_argument);
}
