// eg-stokes: experiment driver for the EG Stokes solvers.
#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "egstokes/assembly.hpp"
#include "egstokes/experiments.hpp"
#include "egstokes/problems.hpp"

namespace {

constexpr const char* kColumns = R"(CSV columns by study:
  convergence  method,n,h,nu,velocity_energy,velocity_rate,pressure_l2,pressure_rate,
               pressure_aux,aux_rate,max_div,iterations,status
  robustness   method,n,nu,velocity_energy,pressure_l2,pressure_aux,max_div,iterations,status
  precond      fidelity,nu,<method>:<kind>... (iteration counts, "--" = not converged);
               condition numbers go to <out stem>_kappa.csv as nu,<method>...
  sparsity     method,n,elements,dofs,nnz,reduction)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enriched Galerkin Stokes solvers: convergence, robustness, preconditioner and sparsity studies"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one study and print its table");
  run->footer(kColumns);
  std::string config_path, study, problem, methods, n, nu, precond, fidelity, solver, out, vtk;
  double rho = 0.0, tol = 1e-8;
  int max_iter = 500, workers = 1;
  bool extended = false, no_kappa = false;
  run->add_option("--config", config_path, "key = value file; command-line flags override it");
  run->add_option("--study", study, "convergence | robustness | precond | sparsity");
  run->add_option("--problem", problem, "vortex2d | cube3d | lshape3d");
  run->add_option("--methods", methods, "comma list of st, pr, ppr, cpr");
  run->add_option("--n", n, "comma list of subdivisions, h = 1/n");
  run->add_option("--nu", nu, "comma list of viscosities");
  run->add_option("--rho", rho, "penalty parameter (default 10 in 2D, 2 in 3D)");
  run->add_option("--solver", solver, "direct | gmres | minres (convergence and robustness)");
  run->add_option("--precond", precond, "diag | lower | upper");
  run->add_option("--fidelity", fidelity, "exact | inexact");
  run->add_option("--tol", tol, "relative residual tolerance of the outer Krylov solve");
  run->add_option("--max-iter", max_iter, "outer iteration cap");
  run->add_option("--out", out, "CSV output path");
  run->add_option("--vtk", vtk, "VTK output path (finest mesh, one file per method)");
  run->add_option("--workers", workers, "threads for independent cases");
  run->add_flag("--extended", extended, "lift the desk-scale mesh caps (2D n <= 128, 3D n <= 32)");
  run->add_flag("--no-kappa", no_kappa, "precond study: skip condition numbers");

  // export
  auto* exp = app.add_subcommand("export", "Write one method's matrix and right-hand side in Matrix Market format");
  std::string e_problem = "vortex2d", e_method = "pr", e_prefix = "system";
  int e_n = 4;
  double e_nu = 1.0, e_rho = 0.0;
  exp->add_option("--problem", e_problem, "vortex2d | cube3d | lshape3d");
  exp->add_option("--method", e_method, "st | pr | ppr | cpr");
  exp->add_option("--n", e_n, "subdivisions");
  exp->add_option("--nu", e_nu, "viscosity");
  exp->add_option("--rho", e_rho, "penalty parameter (default per problem)");
  exp->add_option("--prefix", e_prefix, "writes <prefix>_matrix.mtx and <prefix>_rhs.mtx");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      egstokes::ExperimentConfig cfg;
      if (!config_path.empty()) egstokes::read_config_file(cfg, config_path);
      auto set = [&](const char* flag, const std::string& key, const std::string& value) {
        if (run->count(flag)) egstokes::apply_setting(cfg, key, value);
      };
      set("--study", "study", study);
      set("--problem", "problem", problem);
      set("--methods", "methods", methods);
      set("--n", "n", n);
      set("--nu", "nu", nu);
      set("--rho", "rho", std::to_string(rho));
      set("--solver", "solver", solver);
      set("--precond", "precond", precond);
      set("--fidelity", "fidelity", fidelity);
      set("--max-iter", "max_iter", std::to_string(max_iter));
      set("--out", "out", out);
      set("--vtk", "vtk", vtk);
      set("--workers", "workers", std::to_string(workers));
      if (run->count("--tol")) cfg.tol = tol;
      if (run->count("--rho")) cfg.rho = rho;
      if (extended) cfg.extended = true;
      if (no_kappa) cfg.kappa = false;
      std::cout << egstokes::run_study(cfg);
    } else if (*exp) {
      const egstokes::ProblemSpec p = egstokes::get_problem(e_problem, e_nu);
      const double rho = exp->count("--rho") ? e_rho : p.rho;
      const egstokes::Discretization d = egstokes::discretize(p.build_mesh(e_n), p.f, p.g, e_nu, rho);
      const egstokes::StokesSystem s =
          egstokes::build_system(egstokes::parse_method(e_method), d.blocks, d.mesh.volumes());
      egstokes::write_matrix_market(s.matrix, e_prefix + "_matrix.mtx");
      egstokes::SpMat rhs(s.rhs.size(), 1);
      for (egstokes::Index i = 0; i < s.rhs.size(); ++i) {
        if (s.rhs[i] != 0.0) rhs.insert(i, 0) = s.rhs[i];
      }
      egstokes::write_matrix_market(rhs, e_prefix + "_rhs.mtx");
      std::cout << "wrote " << e_prefix << "_matrix.mtx (" << s.matrix.rows() << " rows, " << s.matrix.nonZeros()
                << " nonzeros) and " << e_prefix << "_rhs.mtx\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "eg-stokes: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
