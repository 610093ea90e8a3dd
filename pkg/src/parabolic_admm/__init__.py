"""Sparse optimal control of parabolic equations by inexact ADMM."""

from .admm import (
    AdmmParams,
    IterateTriple,
    IterationRecord,
    SolveReport,
    ThetaSchedule,
    algebraic,
    beta_update,
    compute_residuals,
    fixed,
    geometric,
    run_admm_exact,
    run_inadmm,
    run_pgd,
    theta_next,
)
from .cg import CgOutcome, cg_solve
from .errors import ConfigurationError, DataError, NotSPDError, ParameterError, SolverError
from .grid import Grid, GridSpec, assemble, build_grid
from .harness import RunConfig, compute_metrics, load_config, run
from .pde import Discretization, objective_full, objective_J
from .problems import DiscreteProblem, ProblemSpec, discretize, example1, example2, example3, example4, make_problem
from .prox import BoxBounds, project_box, soft_threshold, z_update
from .reduced import ReducedOperator
from .tables import TableRow, reproduce_table

__all__ = [name for name in dir() if not name.startswith("_")]
