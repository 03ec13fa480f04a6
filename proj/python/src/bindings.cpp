#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "egstokes/analysis.hpp"
#include "egstokes/experiments.hpp"
#include "egstokes/problems.hpp"
#include "egstokes/solver.hpp"
#include "egstokes/system.hpp"

namespace py = pybind11;
using namespace egstokes;

namespace {

struct PySystem {
  ProblemSpec problem;
  Discretization disc;
  StokesSystem system;
};

PySystem assemble(const std::string& problem, const std::string& method, int n, double nu, std::optional<double> rho) {
  ProblemSpec p = get_problem(problem, nu);
  const double r = rho.value_or(p.rho);
  Discretization d = discretize(p.build_mesh(n), p.f, p.g, nu, r);
  p.rho = r;
  StokesSystem s = build_system(parse_method(method), d.blocks, d.mesh.volumes());
  return {std::move(p), std::move(d), std::move(s)};
}

py::dict errors_dict(const PySystem& s, const Vec& x) {
  const ErrorReport e =
      compute_errors(s.disc.mesh, s.disc.layout, s.problem, expand_solution(s.system, x), s.problem.rho);
  py::dict d;
  d["h"] = e.h;
  d["velocity_energy"] = e.velocity_energy;
  d["pressure_l2"] = e.pressure_l2;
  d["pressure_auxiliary"] = e.pressure_auxiliary;
  d["max_divergence"] = e.max_divergence;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Enriched Galerkin Stokes solvers";

  m.def("problem_ids", &problem_ids);

  m.def(
      "mesh_counts",
      [](const std::string& problem, int n) {
        const SimplicialMesh mesh = get_problem(problem, 1.0).build_mesh(n);
        py::dict d;
        d["vertices"] = mesh.num_vertices();
        d["elements"] = mesh.num_elements();
        d["facets"] = mesh.num_facets();
        d["boundary_facets"] = mesh.num_boundary_facets();
        d["measure"] = mesh.measure();
        return d;
      },
      py::arg("problem"), py::arg("n"));

  py::class_<PySystem>(m, "System")
      .def_property_readonly("method", [](const PySystem& s) { return method_name(s.system.method); })
      .def_property_readonly("n_velocity", [](const PySystem& s) { return s.system.n_velocity; })
      .def_property_readonly("n_pressure", [](const PySystem& s) { return s.system.n_pressure; })
      .def_property_readonly("matrix", [](const PySystem& s) { return s.system.matrix; })
      .def_property_readonly("rhs", [](const PySystem& s) { return s.system.rhs; })
      .def_property_readonly("mass_pressure", [](const PySystem& s) { return s.system.M_p; })
      .def(
          "solve_direct", [](const PySystem& s) { return solve_direct(s.system); },
          "Sparse LU solve with the pressure gauge fixed to zero mean.")
      .def(
          "solve_iterative",
          [](const PySystem& s, const std::string& precond, const std::string& fidelity, double tol, int max_iter,
             const std::string& krylov) {
            KrylovOptions opt;
            opt.rel_tol = tol;
            opt.max_iter = max_iter;
            const KrylovMethod km = krylov == "minres" ? KrylovMethod::minres : KrylovMethod::gmres;
            const KrylovResult r =
                solve_iterative(s.system, parse_precond_kind(precond), parse_fidelity(fidelity), opt, km);
            py::dict info;
            info["iterations"] = r.report.iterations;
            info["converged"] = r.report.converged;
            info["relative_residual"] = r.report.relative_residual;
            info["velocity_inner_mean"] = r.report.velocity_inner.mean();
            info["pressure_inner_mean"] = r.report.pressure_inner.mean();
            return py::make_tuple(r.x, info);
          },
          py::arg("precond") = "upper", py::arg("fidelity") = "exact", py::arg("tol") = 1e-8,
          py::arg("max_iter") = 500, py::arg("krylov") = "gmres")
      .def("expand", [](const PySystem& s, const Vec& x) { return expand_solution(s.system, x); },
           "Full (U^D, U^C, P) vector; recovers U^D for CPR-EG.")
      .def("errors", &errors_dict, py::arg("x"))
      .def("condition_number", [](const PySystem& s, Index max_dofs) { return condition_number(s.system, max_dofs); },
           py::arg("max_dofs") = 6000);

  m.def("assemble", &assemble, py::arg("problem"), py::arg("method"), py::arg("n"), py::arg("nu"),
        py::arg("rho") = py::none());

  m.def(
      "run_study",
      [](const std::map<std::string, std::string>& settings) {
        ExperimentConfig c;
        for (const auto& [k, v] : settings) apply_setting(c, k, v);
        return run_study(c);
      },
      py::arg("settings"), "Runs a study from CLI-style settings and returns the rendered table.");
}
