#include "egstokes/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace egstokes {

LinearOperator as_operator(const SpMat& A) {
  return [&A](const Vec& x) -> Vec { return A * x; };
}

LinearOperator identity_operator() {
  return [](const Vec& x) { return x; };
}

void InnerStats::record(int its) {
  ++applications;
  iterations += its;
  min_iterations = std::min(min_iterations, its);
  max_iterations = std::max(max_iterations, its);
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void givens(double a, double b, double& c, double& s) {
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
  } else {
    const double r = std::hypot(a, b);
    c = a / r;
    s = b / r;
  }
}

void finish(KrylovResult& res, const LinearOperator& A, const Vec& b, double tol, Clock::time_point t0) {
  const double bnorm = b.norm();
  res.report.relative_residual = bnorm > 0.0 ? (b - A(res.x)).norm() / bnorm : 0.0;
  if (!res.report.converged) res.report.converged = res.report.relative_residual <= tol;
  res.report.seconds = elapsed(t0);
}

}  // namespace

KrylovResult gmres(const LinearOperator& A, const LinearOperator& M, const Vec& b, const KrylovOptions& opt) {
  const auto t0 = Clock::now();
  KrylovResult res;
  res.report.solver = "gmres";
  const Index n = b.size();
  res.x = Vec::Zero(n);
  const double bnorm = b.norm();
  res.report.residual_history.push_back(bnorm > 0.0 ? 1.0 : 0.0);
  if (bnorm == 0.0) {
    res.report.converged = true;
    finish(res, A, b, opt.rel_tol, t0);
    return res;
  }
  const int m = opt.restart > 0 ? opt.restart : opt.max_iter;
  const double target = opt.rel_tol * bnorm;
  int total = 0;
  while (true) {
    const Vec r = b - A(res.x);
    const double beta = r.norm();
    res.report.estimated_relative_residual = beta / bnorm;
    if (beta <= target) {
      res.report.converged = true;
      break;
    }
    if (total >= opt.max_iter) break;

    std::vector<Vec> V{r / beta}, Z;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Vec cs = Vec::Zero(m), sn = Vec::Zero(m), g = Vec::Zero(m + 1);
    g[0] = beta;
    int k = 0;
    while (k < m && total < opt.max_iter) {
      Z.push_back(M(V[k]));
      Vec w = A(Z[k]);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = w.dot(V[i]);
        w -= H(i, k) * V[i];
      }
      H(k + 1, k) = w.norm();
      const bool breakdown = H(k + 1, k) <= 1e-14 * std::abs(H(k, k)) || H(k + 1, k) == 0.0;
      if (!breakdown) V.push_back(w / H(k + 1, k));
      for (int i = 0; i < k; ++i) {
        const double h0 = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = h0;
      }
      givens(H(k, k), H(k + 1, k), cs[k], sn[k]);
      H(k, k) = cs[k] * H(k, k) + sn[k] * H(k + 1, k);
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++k;
      ++total;
      const double est = std::abs(g[k]);
      res.report.residual_history.push_back(est / bnorm);
      if (est <= target || breakdown) break;
    }
    const Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) res.x += y[i] * Z[i];
    res.report.iterations = total;
    if (k == 0) break;
  }
  res.report.iterations = total;
  finish(res, A, b, opt.rel_tol, t0);
  return res;
}

KrylovResult minres(const LinearOperator& A, const LinearOperator& M, const Vec& b, const KrylovOptions& opt) {
  const auto t0 = Clock::now();
  KrylovResult res;
  res.report.solver = "minres";
  const Index n = b.size();
  res.x = Vec::Zero(n);
  Vec r1 = b;
  Vec y = M(r1);
  const double beta1 = std::sqrt(std::max(r1.dot(y), 0.0));
  res.report.residual_history.push_back(beta1 > 0.0 ? 1.0 : 0.0);
  if (beta1 == 0.0) {
    res.report.converged = true;
    finish(res, A, b, opt.rel_tol, t0);
    return res;
  }
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1, cs = -1.0, sn = 0.0;
  Vec w = Vec::Zero(n), w2 = Vec::Zero(n), r2 = r1;
  int it = 0;
  while (it < opt.max_iter) {
    ++it;
    const Vec v = y / beta;
    y = A(v);
    if (it >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = M(r2);
    oldb = beta;
    beta = std::sqrt(std::max(r2.dot(y), 0.0));
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    const Vec w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    res.x += phi * w;
    res.report.residual_history.push_back(phibar / beta1);
    if (phibar <= opt.rel_tol * beta1) {
      res.report.converged = true;
      break;
    }
    if (beta == 0.0) break;
  }
  res.report.iterations = it;
  res.report.estimated_relative_residual = phibar / beta1;
  const bool est_conv = res.report.converged;
  res.report.converged = false;
  finish(res, A, b, opt.rel_tol, t0);
  res.report.converged = res.report.converged || est_conv;
  return res;
}

KrylovResult cg(const LinearOperator& A, const LinearOperator& M, const Vec& b, const KrylovOptions& opt) {
  const auto t0 = Clock::now();
  KrylovResult res;
  res.report.solver = "cg";
  res.x = Vec::Zero(b.size());
  const double bnorm = b.norm();
  res.report.residual_history.push_back(bnorm > 0.0 ? 1.0 : 0.0);
  if (bnorm == 0.0) {
    res.report.converged = true;
    finish(res, A, b, opt.rel_tol, t0);
    return res;
  }
  Vec r = b;
  Vec z = M(r);
  Vec p = z;
  double rz = r.dot(z);
  int it = 0;
  while (it < opt.max_iter) {
    const Vec Ap = A(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rz / pAp;
    res.x += alpha * p;
    r -= alpha * Ap;
    ++it;
    const double rel = r.norm() / bnorm;
    res.report.residual_history.push_back(rel);
    if (rel <= opt.rel_tol) {
      res.report.converged = true;
      break;
    }
    z = M(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.report.iterations = it;
  res.report.estimated_relative_residual = res.report.residual_history.back();
  finish(res, A, b, opt.rel_tol, t0);
  return res;
}

namespace {

class DirectSolver final : public SpdSolver {
 public:
  explicit DirectSolver(const SpMat& A) {
    llt_.compute(A);
    if (llt_.info() != Eigen::Success) throw std::invalid_argument("make_direct_solver: matrix is not SPD");
  }
  Vec solve(const Vec& b) const override {
    stats_.record(0);
    return llt_.solve(b);
  }

 private:
  Eigen::SimplicialLLT<SpMat> llt_;
};

class DiagonalSolver final : public SpdSolver {
 public:
  explicit DiagonalSolver(Vec inv) : inv_(std::move(inv)) {}
  Vec solve(const Vec& b) const override {
    stats_.record(0);
    return inv_.cwiseProduct(b);
  }

 private:
  Vec inv_;
};

class AmgCgSolver final : public SpdSolver {
 public:
  AmgCgSolver(const SpMat& A, double tol, const AmgOptions& amg) : A_(A), amg_(A, amg), tol_(tol) {}
  Vec solve(const Vec& b) const override {
    KrylovOptions opt{tol_, 1000, 0};
    KrylovResult r = cg(as_operator(A_), [this](const Vec& x) { return amg_.vcycle(x); }, b, opt);
    stats_.record(r.report.iterations);
    return r.x;
  }

 private:
  const SpMat& A_;
  SmoothedAggregationAmg amg_;
  double tol_;
};

class JacobiCgSolver final : public SpdSolver {
 public:
  JacobiCgSolver(const SpMat& A, double tol) : A_(A), inv_(A.diagonal().cwiseInverse()), tol_(tol) {
    if ((A.diagonal().array() <= 0.0).any()) throw std::invalid_argument("make_jacobi_cg_solver: nonpositive diagonal");
  }
  Vec solve(const Vec& b) const override {
    KrylovOptions opt{tol_, 5000, 0};
    KrylovResult r = cg(as_operator(A_), [this](const Vec& x) -> Vec { return inv_.cwiseProduct(x); }, b, opt);
    stats_.record(r.report.iterations);
    return r.x;
  }

 private:
  const SpMat& A_;
  Vec inv_;
  double tol_;
};

}  // namespace

std::unique_ptr<SpdSolver> make_direct_solver(const SpMat& A) { return std::make_unique<DirectSolver>(A); }

std::unique_ptr<SpdSolver> make_diagonal_solver(Vec inverse_diagonal) {
  return std::make_unique<DiagonalSolver>(std::move(inverse_diagonal));
}

std::unique_ptr<SpdSolver> make_amg_cg_solver(const SpMat& A, double rel_tol, const AmgOptions& amg) {
  return std::make_unique<AmgCgSolver>(A, rel_tol, amg);
}

std::unique_ptr<SpdSolver> make_jacobi_cg_solver(const SpMat& A, double rel_tol) {
  return std::make_unique<JacobiCgSolver>(A, rel_tol);
}

std::unique_ptr<SpdSolver> inner_velocity_solver(Fidelity fidelity, const SpMat& A) {
  if (fidelity == Fidelity::exact) return make_direct_solver(A);
  return make_amg_cg_solver(A, 1e-6);
}

Fidelity parse_fidelity(const std::string& s) {
  if (s == "exact") return Fidelity::exact;
  if (s == "inexact") return Fidelity::inexact;
  throw std::invalid_argument("unknown fidelity '" + s + "' (expected exact or inexact)");
}

PrecondKind parse_precond_kind(const std::string& s) {
  if (s == "diag" || s == "diagonal") return PrecondKind::diagonal;
  if (s == "lower") return PrecondKind::lower;
  if (s == "upper") return PrecondKind::upper;
  throw std::invalid_argument("unknown preconditioner '" + s + "' (expected diag, lower or upper)");
}

std::string to_string(Fidelity f) { return f == Fidelity::exact ? "exact" : "inexact"; }

std::string to_string(PrecondKind k) {
  switch (k) {
    case PrecondKind::diagonal: return "diag";
    case PrecondKind::lower: return "lower";
    case PrecondKind::upper: return "upper";
  }
  return "?";
}

PrecondVariant variant_of(Method m) {
  switch (m) {
    case Method::st:
    case Method::pr: return PrecondVariant::full;
    case Method::ppr: return PrecondVariant::perturbed;
    case Method::cpr: return PrecondVariant::condensed;
  }
  return PrecondVariant::full;
}

SpMat pressure_schur_block(const StokesSystem& system) {
  SpMat S = (1.0 / system.nu) * system.M_p;
  if (system.method == Method::cpr) S = S - system.C;  // C = -A^E_p
  S.makeCompressed();
  return S;
}

BlockPreconditioner::BlockPreconditioner(PrecondKind kind, Fidelity fidelity, const StokesSystem& system)
    : kind_(kind),
      fidelity_(fidelity),
      variant_(variant_of(system.method)),
      n_u_(system.n_velocity),
      n_p_(system.n_pressure),
      G_(&system.G),
      S_(pressure_schur_block(system)) {
  velocity_ = inner_velocity_solver(fidelity, system.A_u);
  if (variant_ == PrecondVariant::condensed) {
    pressure_ = fidelity == Fidelity::exact ? make_direct_solver(S_) : make_jacobi_cg_solver(S_, 1e-6);
  } else {
    pressure_ = make_diagonal_solver(S_.diagonal().cwiseInverse());
  }
}

Vec BlockPreconditioner::apply(const Vec& r) const {
  const Vec r_u = r.head(n_u_);
  const Vec r_p = r.tail(n_p_);
  Vec z(n_u_ + n_p_);
  switch (kind_) {
    case PrecondKind::diagonal:
      z.head(n_u_) = velocity_->solve(r_u);
      z.tail(n_p_) = pressure_->solve(r_p);
      break;
    case PrecondKind::lower: {
      const Vec z_u = velocity_->solve(r_u);
      z.head(n_u_) = z_u;
      z.tail(n_p_) = pressure_->solve(r_p - G_->transpose() * z_u);
      break;
    }
    case PrecondKind::upper: {
      const Vec z_p = pressure_->solve(r_p);
      z.tail(n_p_) = z_p;
      z.head(n_u_) = velocity_->solve(r_u - *G_ * z_p);
      break;
    }
  }
  return z;
}

LinearOperator BlockPreconditioner::as_operator() const {
  return [this](const Vec& r) { return apply(r); };
}

KrylovResult solve_iterative(const StokesSystem& system, PrecondKind kind, Fidelity fidelity, const KrylovOptions& opt,
                             KrylovMethod method) {
  const auto t0 = Clock::now();
  const BlockPreconditioner B(kind, fidelity, system);
  const LinearOperator A = egstokes::as_operator(system.matrix);
  KrylovResult res;
  if (method == KrylovMethod::minres) {
    if (kind != PrecondKind::diagonal) throw std::invalid_argument("solve_iterative: MINRES needs the diagonal preconditioner");
    res = minres(A, B.as_operator(), system.rhs, opt);
  } else {
    res = gmres(A, B.as_operator(), system.rhs, opt);
  }
  project_pressure_mean(res.x, system.n_velocity, system.element_volumes);
  res.report.velocity_inner = B.velocity_solver().stats();
  res.report.pressure_inner = B.pressure_solver().stats();
  res.report.seconds = elapsed(t0);
  return res;
}

double condition_number(const StokesSystem& system, Index max_dofs) {
  const Index nu = system.n_velocity, np = system.n_pressure;
  std::vector<bool> fixed(nu, false);
  for (Index i : system.fixed_velocity) fixed[i] = true;
  std::vector<Index> keep;
  for (Index i = 0; i < nu; ++i) {
    if (!fixed[i]) keep.push_back(i);
  }
  for (Index i = 0; i < np; ++i) keep.push_back(nu + i);
  const Index n = static_cast<Index>(keep.size());
  if (n > max_dofs) throw std::length_error("condition_number: " + std::to_string(n) + " DoFs exceed the dense limit");

  const Eigen::MatrixXd full = Eigen::MatrixXd(system.matrix);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nu + np, nu + np);
  B.topLeftCorner(nu, nu) = Eigen::MatrixXd(system.A_u);
  B.bottomRightCorner(np, np) = Eigen::MatrixXd(pressure_schur_block(system));
  Eigen::MatrixXd Ar(n, n), Br(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      Ar(i, j) = full(keep[i], keep[j]);
      Br(i, j) = B(keep[i], keep[j]);
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ar, Br, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw std::runtime_error("condition_number: eigensolver failed");
  std::vector<double> lam(n);
  for (Index i = 0; i < n; ++i) lam[i] = std::abs(es.eigenvalues()[i]);
  std::sort(lam.begin(), lam.end());
  return lam.back() / lam[1];
}

void write_residual_history(const SolveReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_residual_history: cannot open " + path);
  out << "iteration,relative_residual\n";
  out.precision(10);
  for (std::size_t i = 0; i < report.residual_history.size(); ++i) out << i << ',' << report.residual_history[i] << '\n';
}

}  // namespace egstokes
