"""Enriched Galerkin Stokes solvers (ST-EG, PR-EG, PPR-EG, CPR-EG)."""

from ._core import System, assemble, mesh_counts, problem_ids, run_study

__all__ = ["System", "assemble", "mesh_counts", "problem_ids", "run_study", "solve"]


def solve(problem="vortex2d", method="pr", n=8, nu=1.0, rho=None):
    """Assemble and solve one case directly; returns the error dictionary."""
    system = assemble(problem, method, n, nu, rho)
    return system.errors(system.solve_direct())
