#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egstokes/analysis.hpp"
#include "egstokes/solver.hpp"
#include "egstokes/system.hpp"

namespace egstokes {

enum class Study { convergence, robustness, precond, sparsity };
enum class SolverChoice { direct, gmres, minres };

Study parse_study(const std::string& s);
std::string to_string(Study s);
SolverChoice parse_solver(const std::string& s);
std::string to_string(SolverChoice s);

struct ExperimentConfig {
  Study study = Study::convergence;
  std::string problem = "vortex2d";
  std::vector<Method> methods;  // empty: study default
  std::vector<int> n;           // h = 1/n; empty: study default
  std::vector<double> nu;       // empty: study default
  std::optional<double> rho;    // unset: problem default (10 in 2D, 2 in 3D)
  SolverChoice solver = SolverChoice::direct;
  double tol = 1e-8;
  int max_iter = 500;
  PrecondKind precond = PrecondKind::upper;  // used by gmres/minres solves
  Fidelity fidelity = Fidelity::exact;
  bool kappa = true;  // precond study: also compute condition numbers
  std::string output;
  std::string vtk;
  bool extended = false;
  int workers = 1;
};

/// Sets one option from its long name (the CLI flag without dashes).
/// Throws std::invalid_argument for unknown keys or malformed values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines; '#' starts a comment, [section] headers are
/// ignored, values may be quoted.
void read_config_file(ExperimentConfig& config, const std::string& path);

/// Fills empty fields with the study defaults and checks the desk-scale caps
/// (2D n <= 64, 3D n <= 16; doubled with `extended`).
ExperimentConfig resolve(const ExperimentConfig& config);

/// One (method, h, nu) case.
struct CaseRow {
  std::string method;
  int n = 0;
  double h = 0.0;
  double nu = 0.0;
  double rho = 0.0;
  Index dofs = 0;
  Index nnz = 0;
  double velocity_energy = 0.0;
  double pressure_l2 = 0.0;
  double pressure_auxiliary = 0.0;
  double max_divergence = 0.0;
  std::optional<double> velocity_rate, pressure_rate, auxiliary_rate;
  int iterations = 0;     // 0 for the direct solver
  bool converged = true;
  double seconds = 0.0;   // not written to tables, which stay reproducible
  std::string status = "ok";
};

std::vector<CaseRow> run_convergence(const ExperimentConfig& config);
std::vector<CaseRow> run_robustness(const ExperimentConfig& config);

struct PrecondCell {
  std::string method;
  PrecondKind kind = PrecondKind::diagonal;
  Fidelity fidelity = Fidelity::exact;
  double nu = 0.0;
  int iterations = 0;
  bool converged = false;
  double velocity_inner = 0.0;  // mean inner iterations per application
  double pressure_inner = 0.0;
};

struct KappaCell {
  std::string method;
  double nu = 0.0;
  double kappa = 0.0;
};

struct PrecondStudy {
  int n = 0;
  std::vector<double> nu;
  std::vector<std::string> methods;
  std::vector<PrecondCell> cells;  // every method x kind x fidelity x nu
  std::vector<KappaCell> kappa;    // diagonal exact preconditioner only
};

/// All 9 exact and 9 inexact preconditioners on the first n of the config.
PrecondStudy run_precond_study(const ExperimentConfig& config);

struct SparsityRow {
  std::string method;
  int n = 0;
  Index elements = 0;
  Index dofs = 0;
  Index nnz = 0;
  double reduction = 0.0;  // 1 - dofs / dofs(PR-EG) on the same mesh
};

std::vector<SparsityRow> run_sparsity(const ExperimentConfig& config);

/// String table rendered as CSV or as aligned text.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] std::string to_text() const;
};

/// Four significant digits with a compact exponent: 1.060e-1.
std::string format_sci(double x);

Table convergence_table(const std::vector<CaseRow>& rows, bool csv);
Table robustness_table(const std::vector<CaseRow>& rows, bool csv);
/// Table 3 layout: one row per (fidelity, nu), one column per method x kind;
/// non-converged runs show "--".
Table precond_table(const PrecondStudy& study);
Table kappa_table(const PrecondStudy& study);
Table sparsity_table(const std::vector<SparsityRow>& rows);

/// Runs the configured study and renders text (and, with `config.output`, CSV).
std::string run_study(const ExperimentConfig& config);

}  // namespace egstokes
