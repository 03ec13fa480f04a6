#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "egstokes/amg.hpp"
#include "egstokes/assembly.hpp"
#include "egstokes/system.hpp"

namespace egstokes {

using LinearOperator = std::function<Vec(const Vec&)>;

LinearOperator as_operator(const SpMat& A);
LinearOperator identity_operator();

struct InnerStats {
  long applications = 0;
  long iterations = 0;
  int min_iterations = std::numeric_limits<int>::max();
  int max_iterations = 0;

  void record(int its);
  [[nodiscard]] double mean() const { return applications ? double(iterations) / double(applications) : 0.0; }
};

struct SolveReport {
  std::string solver;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;            // recomputed ||b - A x|| / ||b||
  double estimated_relative_residual = 0.0;  // from the Krylov recurrence
  std::vector<double> residual_history;      // estimate after every iteration, index 0 = initial
  double seconds = 0.0;
  InnerStats velocity_inner;
  InnerStats pressure_inner;
  std::optional<double> condition_number;
};

struct KrylovOptions {
  double rel_tol = 1e-8;
  int max_iter = 500;
  int restart = 0;  // 0: no restart
};

struct KrylovResult {
  Vec x;
  SolveReport report;
};

/// Flexible right-preconditioned GMRES from a zero initial guess. Stops when
/// the (unpreconditioned) residual drops below rel_tol ||b||.
KrylovResult gmres(const LinearOperator& A, const LinearOperator& M, const Vec& b, const KrylovOptions& opt = {});

/// Preconditioned MINRES for symmetric A and SPD M. Stops on the
/// M^-1-norm residual estimate relative to its initial value.
KrylovResult minres(const LinearOperator& A, const LinearOperator& M, const Vec& b, const KrylovOptions& opt = {});

/// Preconditioned conjugate gradients from a zero initial guess.
KrylovResult cg(const LinearOperator& A, const LinearOperator& M, const Vec& b, const KrylovOptions& opt = {});

/// Solver for an SPD block. Iteration statistics (zero for direct) accumulate per call.
class SpdSolver {
 public:
  virtual ~SpdSolver() = default;
  [[nodiscard]] virtual Vec solve(const Vec& b) const = 0;
  [[nodiscard]] const InnerStats& stats() const { return stats_; }
  void reset_stats() const { stats_ = {}; }

 protected:
  mutable InnerStats stats_;
};

enum class Fidelity { exact, inexact };
enum class PrecondKind { diagonal, lower, upper };
enum class PrecondVariant { full, perturbed, condensed };

Fidelity parse_fidelity(const std::string& s);
PrecondKind parse_precond_kind(const std::string& s);
std::string to_string(Fidelity f);
std::string to_string(PrecondKind k);
PrecondVariant variant_of(Method m);

/// Sparse Cholesky. Throws std::invalid_argument when the matrix is not SPD.
std::unique_ptr<SpdSolver> make_direct_solver(const SpMat& A);
/// Applies a fixed diagonal inverse.
std::unique_ptr<SpdSolver> make_diagonal_solver(Vec inverse_diagonal);
/// CG preconditioned by one smoothed-aggregation V-cycle.
std::unique_ptr<SpdSolver> make_amg_cg_solver(const SpMat& A, double rel_tol = 1e-6, const AmgOptions& amg = {});
/// Jacobi-preconditioned CG.
std::unique_ptr<SpdSolver> make_jacobi_cg_solver(const SpMat& A, double rel_tol = 1e-6);

/// exact: sparse Cholesky; inexact: AMG-preconditioned CG to 1e-6.
std::unique_ptr<SpdSolver> inner_velocity_solver(Fidelity fidelity, const SpMat& A);

/// One of the nine exact or nine inexact block preconditioners.
///
/// Pressure block S = nu^-1 M_p (full and perturbed) or S^E_p = nu^-1 M_p + A^E_p
/// (condensed). diagonal: (A^-1 r_u, S^-1 r_p); lower: z_p = S^-1 (r_p - G^T z_u);
/// upper: z_u = A^-1 (r_u - G z_p).
class BlockPreconditioner {
 public:
  BlockPreconditioner(PrecondKind kind, Fidelity fidelity, const StokesSystem& system);

  [[nodiscard]] Vec apply(const Vec& r) const;
  [[nodiscard]] LinearOperator as_operator() const;

  [[nodiscard]] PrecondKind kind() const { return kind_; }
  [[nodiscard]] Fidelity fidelity() const { return fidelity_; }
  [[nodiscard]] PrecondVariant variant() const { return variant_; }
  [[nodiscard]] const SpdSolver& velocity_solver() const { return *velocity_; }
  [[nodiscard]] const SpdSolver& pressure_solver() const { return *pressure_; }
  /// Matrix of the pressure block S.
  [[nodiscard]] const SpMat& pressure_block() const { return S_; }

 private:
  PrecondKind kind_;
  Fidelity fidelity_;
  PrecondVariant variant_;
  Index n_u_, n_p_;
  const SpMat* G_;
  SpMat S_;
  std::unique_ptr<SpdSolver> velocity_;
  std::unique_ptr<SpdSolver> pressure_;
};

/// S = nu^-1 M_p, plus A^E_p for CPR-EG.
SpMat pressure_schur_block(const StokesSystem& system);

enum class KrylovMethod { gmres, minres };

/// Preconditioned Krylov solve of `system`, followed by pressure mean projection.
KrylovResult solve_iterative(const StokesSystem& system, PrecondKind kind, Fidelity fidelity,
                             const KrylovOptions& opt = {}, KrylovMethod method = KrylovMethod::gmres);

/// kappa = max|lambda| / min|lambda| of A x = lambda B^-1 x, with B^-1 the
/// block-diagonal matrix diag(A_u, S). Strongly eliminated velocity rows are
/// dropped and the single zero eigenvalue (constant pressure) is excluded.
/// Throws std::length_error above max_dofs.
double condition_number(const StokesSystem& system, Index max_dofs = 6000);

/// Writes "iteration,relative_residual" rows.
void write_residual_history(const SolveReport& report, const std::string& path);

}  // namespace egstokes
