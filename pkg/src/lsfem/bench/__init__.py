"""Problem catalog, error norms, convergence and conditioning studies."""

from .problems import PROBLEM_NAMES, get_problem
from .errors import ErrorReport, error_norms, interpolate_solution, sample_solution
from .studies import (
    ConditionRow,
    ModeComparison,
    compare_bc_modes,
    condition_study,
    convergence_study,
    nearest_generated_n,
    solve_problem,
)
from .reports import write_condition_csv, write_convergence_csv, write_vtk

__all__ = [
    "PROBLEM_NAMES",
    "get_problem",
    "ErrorReport",
    "error_norms",
    "interpolate_solution",
    "sample_solution",
    "solve_problem",
    "convergence_study",
    "condition_study",
    "compare_bc_modes",
    "ConditionRow",
    "ModeComparison",
    "nearest_generated_n",
    "write_convergence_csv",
    "write_condition_csv",
    "write_vtk",
]
