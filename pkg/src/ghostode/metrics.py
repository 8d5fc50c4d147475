"""Distances from a candidate function to the solution of the ODE."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import D2UndefinedError
from .epsseries import compose0
from .funcspace import ChebFun, divide, interpolate_interior, l2_norm
from .linsolve import LinearParams, solve_linear
from .recurrence import Expansion, ODEProblem, partial_sum

RESIDUAL_TOL = 1e-13


@dataclass(frozen=True)
class DistanceReport:
    d1: float | None = None
    d2: float | None = None
    d_ex: float | None = None
    ybar: ChebFun | None = None


def _derivs(y, dy, d2y):
    if dy is None:
        dy = y.derivative()
    if d2y is None:
        d2y = dy.derivative()
    return dy, d2y


def residual(problem: ODEProblem, y: ChebFun, dy: ChebFun | None = None, d2y: ChebFun | None = None) -> ChebFun:
    """``g(x, y, y') y'' + h(x, y, y')`` as a ChebFun.

    ``g`` and ``h`` are composed with ``y`` by the order-0 series lift, so a
    removable quotient such as ``dy/x`` at ``x = 0`` is cancelled
    symbolically instead of being sampled.  ``dy`` and ``d2y`` default to
    derivatives of ``y``; passing them avoids the roundoff of a second
    spectral differentiation.
    """
    dy, d2y = _derivs(y, dy, d2y)
    g = compose0(problem.g, y, dy, problem.params)
    h = compose0(problem.h, y, dy, problem.params)
    return g * d2y + h


def d1(problem: ODEProblem, y: ChebFun, dy: ChebFun | None = None, d2y: ChebFun | None = None) -> float:
    """L2 norm of the residual over the problem interval."""
    return l2_norm(residual(problem, y, dy, d2y))


def d2(problem: ODEProblem, y: ChebFun, dy: ChebFun | None = None) -> tuple[float, ChebFun]:
    """Distance to one pass of ``ybar'' = -h/g`` with the original data.

    Returns ``(||y - ybar||, ybar)``.
    """
    if dy is None:
        dy = y.derivative()
    g = compose0(problem.g, y, dy, problem.params)
    gv = g.values(max(4 * g.degree, 256))
    gmax = np.max(np.abs(gv))
    if gmax == 0.0 or np.min(np.abs(gv)) <= 1e-12 * gmax or np.min(gv) < 0 < np.max(gv):
        raise D2UndefinedError("g vanishes along the candidate")
    h = compose0(problem.h, y, dy, problem.params)
    G = divide(-h, g, what="-h/g")
    ybar = solve_linear(LinearParams(1.0), G, problem.bc)
    return l2_norm(y - ybar), ybar


def d_exact(y: ChebFun, y_ref: Callable[[np.ndarray], np.ndarray]) -> float:
    """L2 distance to a reference solution given pointwise."""

    def f(x):
        yv = y(x)
        return yv - y_ref(x), np.max(np.abs(yv))

    n = max(32, 2 * y.degree + 16)
    return l2_norm(interpolate_interior(f, y.interval, tol=RESIDUAL_TOL, n=n))


def sup_error(y: ChebFun, y_ref: Callable[[np.ndarray], np.ndarray], n: int = 2001) -> float:
    """Max of ``|y - y_ref|`` on a uniform interior-inclusive grid."""
    a, b = y.interval
    x = np.linspace(a, b, n)
    return float(np.max(np.abs(y(x) - y_ref(x))))


@dataclass(frozen=True)
class SRatioReport:
    """Ratios ``s_n / s_{n-2}`` of partial-sum norms and their verdict."""

    ratios: tuple
    norms: tuple
    classification: str
    limit: float


def s_ratio(e: Expansion, eps: float, tail: int = 5, tol: float = 1e-2) -> SRatioReport:
    if e.order < 2:
        raise ValueError("s_ratio needs an expansion of order at least 2")
    s = [l2_norm(partial_sum(e, n, eps)) for n in range(e.order + 1)]
    ratios = []
    for n in range(2, e.order + 1):
        r = s[n] / s[n - 2] if s[n - 2] > 0 else (1.0 if s[n] == 0 else np.inf)
        ratios.append((n, float(r)))
    last = np.array([r for _, r in ratios[-tail:]])
    converged = bool(np.all(np.abs(last - 1.0) <= tol))
    return SRatioReport(
        ratios=tuple(ratios),
        norms=tuple(s),
        classification="convergent" if converged else "divergent",
        limit=float(last[-1]),
    )
