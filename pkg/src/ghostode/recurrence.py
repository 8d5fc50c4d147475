"""Order-by-order construction of the epsilon expansion.

For ``g(x, y, y') y'' + h(x, y, y') = 0`` and the linear operator
``L y = p0 y'' + p1 y' + p2 y + p3`` the extended equation
``L y + eps (N y - L y) = 0`` expands as ``y = sum eps^k y_k`` with

    p0 y_k'' + p1 y_k' + p2 y_k = F_k,
    F_0 = -p3,
    F_k = L~ y_{k-1} + p3 [k = 1] - h_{k-1} - sum_l g_{k-1-l} y_l''.

Here ``L~`` is ``L`` without ``p3``, so ``L~ y_{k-1} = F_{k-1}`` by
construction.  Order zero carries the boundary data and every later order
has homogeneous data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from . import expr as ex
from .epsseries import EpsSeries, SeriesLifter
from .exceptions import DivergenceError
from .funcspace import ChebFun, scale
from .linsolve import BoundaryCondition, LinearParams, LinearSolver

BLOWUP = 1e150


@dataclass(frozen=True)
class ODEProblem:
    """``g(x, y, y') y'' + h(x, y, y') = 0`` with side conditions.

    ``g`` and ``h`` may be given as source strings.  ``exact`` is an optional
    vectorized reference solution ``x -> y(x)``.
    """

    g: ex.ExprNode | str
    h: ex.ExprNode | str
    bc: BoundaryCondition
    params: Mapping[str, float] = field(default_factory=dict)
    exact: Callable | None = None
    name: str = "custom"

    def __post_init__(self):
        params = dict(self.params)
        object.__setattr__(self, "params", params)
        for attr in ("g", "h"):
            v = getattr(self, attr)
            if isinstance(v, str):
                v = ex.parse(v, params=params.keys())
                object.__setattr__(self, attr, v)
            missing = v.parameters - params.keys()
            if missing:
                raise ValueError(f"undeclared parameter(s) in {attr}: {sorted(missing)}")

    @property
    def interval(self):
        return self.bc.interval

    @property
    def kind(self):
        return self.bc.kind

    def with_params(self, **kw) -> "ODEProblem":
        params = dict(self.params)
        params.update(kw)
        return replace(self, params=params)

    def with_bc(self, bc: BoundaryCondition) -> "ODEProblem":
        return replace(self, bc=bc, exact=None)

    def residual_pointwise(self, x, y, dy, d2y):
        g = ex.eval_scalar(self.g, x, y, dy, self.params)
        h = ex.eval_scalar(self.h, x, y, dy, self.params)
        return g * d2y + h


def _is_zero(f: ChebFun) -> bool:
    return f.degree == 0 and f.coeffs[0] == 0.0


class Expansion:
    """Coefficients ``y_0 .. y_n`` for one problem and one parameter point.

    Call :meth:`extend` to add orders; earlier coefficients never change.
    """

    def __init__(self, problem: ODEProblem, p: LinearParams):
        self.problem = problem
        self.params = p
        self.solver = LinearSolver(p, problem.interval, problem.kind)
        self._g = SeriesLifter(problem.g, problem.interval, problem.params)
        self._h = SeriesLifter(problem.h, problem.interval, problem.params)
        self.y: list[ChebFun] = []
        self.dy: list[ChebFun] = []
        self.d2y: list[ChebFun] = []
        self.forcing: list[ChebFun] = []
        self.g: list[ChebFun] = []
        self.h: list[ChebFun] = []

    @property
    def order(self) -> int:
        return len(self.y) - 1

    @property
    def series(self) -> EpsSeries:
        return EpsSeries(self.y)

    def extend(self, n_max: int) -> "Expansion":
        while self.order < n_max:
            self._step()
        return self

    def _step(self):
        k = self.order + 1
        p = self.params
        iv = self.problem.interval
        if k == 0:
            F = ChebFun([-p.p3], iv)
            bc = self.problem.bc
            left, right = bc.value_left, bc.value_right
        else:
            self.g.append(self._g.push(self.y[k - 1], self.dy[k - 1]))
            self.h.append(self._h.push(self.y[k - 1], self.dy[k - 1]))
            F = -self.h[k - 1]
            if k >= 2:
                F = F + self.forcing[k - 1]
            for l in range(k):
                gk = self.g[k - 1 - l]
                if not _is_zero(gk) and not _is_zero(self.d2y[l]):
                    F = F - gk * self.d2y[l]
            left = right = 0.0
        y = self.solver.solve(F, left, right)
        if not np.isfinite(y.vscale) or y.vscale > BLOWUP:
            raise DivergenceError(f"expansion coefficient {k} blew up")
        dy = y.derivative()
        # y'' from the equation itself rather than a second differentiation
        d2 = F
        if p.p1:
            d2 = d2 - p.p1 * dy
        if p.p2:
            d2 = d2 - p.p2 * y
        d2y = scale(d2, 1.0 / p.p0)
        self.y.append(y)
        self.dy.append(dy)
        self.d2y.append(d2y)
        self.forcing.append(F)


def expand(problem: ODEProblem, p: LinearParams, n_max: int) -> Expansion:
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    return Expansion(problem, p).extend(n_max)


def _horner(cs, n, eps):
    acc = cs[n]
    for k in range(n - 1, -1, -1):
        acc = cs[k] + scale(acc, eps)
    return acc


def partial_sum(e: Expansion, n: int, eps: float | None = None) -> ChebFun:
    """``y_n = sum_{k <= n} eps^k y_k``; ``eps`` defaults to the params' value."""
    if n > e.order:
        raise ValueError(f"order {n} not computed (have {e.order})")
    eps = e.params.epsilon if eps is None else eps
    return _horner(e.y, n, eps)


def partial_sum_derivs(e: Expansion, n: int, eps: float | None = None):
    """``(y_n, y_n', y_n'')`` with the second derivative taken from the equation."""
    if n > e.order:
        raise ValueError(f"order {n} not computed (have {e.order})")
    eps = e.params.epsilon if eps is None else eps
    return _horner(e.y, n, eps), _horner(e.dy, n, eps), _horner(e.d2y, n, eps)
