"""Ghost perturbation scheme for second-order ODEs.

The nonlinear equation ``g(x, y, y') y'' + h(x, y, y') = 0`` is embedded in
``L y + eps (N y - L y) = 0`` with a constant-coefficient operator ``L``.
Each order of the epsilon expansion is a linear solve with a closed form, and
the free parameters of ``L`` are chosen by minimizing a distance to the
solution.
"""

from .analysis import GhostExpansion, ghost_expansion, linear_correction, refine
from .estimator import GhostSolver
from .exceptions import GhostODEError
from .expr import parse
from .funcspace import ChebFun, interpolate
from .linsolve import BoundaryCondition, LinearParams, solve_linear
from .march import MarchConfig, PiecewiseSolution, march
from .metrics import d1, d2, d_exact, s_ratio
from .optimize import (
    ParamSpec,
    SearchRange,
    critical_parameter,
    fit_asymptotics,
    predict_order,
    scan_minima,
    scan_orders,
    track_sequences,
)
from .problems import bratu_constants, catalog, get_problem
from .recurrence import Expansion, ODEProblem, expand, partial_sum

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "ChebFun",
    "Expansion",
    "GhostExpansion",
    "GhostODEError",
    "GhostSolver",
    "LinearParams",
    "MarchConfig",
    "ODEProblem",
    "ParamSpec",
    "PiecewiseSolution",
    "SearchRange",
    "bratu_constants",
    "catalog",
    "critical_parameter",
    "d1",
    "d2",
    "d_exact",
    "expand",
    "fit_asymptotics",
    "get_problem",
    "ghost_expansion",
    "interpolate",
    "linear_correction",
    "march",
    "parse",
    "partial_sum",
    "predict_order",
    "refine",
    "s_ratio",
    "scan_minima",
    "scan_orders",
    "solve_linear",
    "track_sequences",
]
