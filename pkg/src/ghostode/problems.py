"""Catalog of reference problems with exact solutions where known."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .linsolve import BoundaryCondition
from .recurrence import ODEProblem

TANGENT_TOL = 1e-4


@dataclass(frozen=True)
class BratuConstants:
    """``y(x) = log(2 B^2 / cosh^2(B x + C))``."""

    B: float
    C: float

    def solution(self) -> Callable[[np.ndarray], np.ndarray]:
        B, C = self.B, self.C

        def y(x):
            u = B * np.asarray(x, dtype=float) + C
            # log(2B^2) - 2 log cosh(u), written to stay finite for large |u|
            au = np.abs(u)
            return math.log(2 * B * B) - 2 * (au + np.log1p(np.exp(-2 * au)) - math.log(2.0))

        return y

    def z_solution(self) -> Callable[[np.ndarray], np.ndarray]:
        """``z = exp(-y) = cosh^2(B x + C) / (2 B^2)``."""
        B, C = self.B, self.C
        return lambda x: np.cosh(B * np.asarray(x, dtype=float) + C) ** 2 / (2 * B * B)


def _bratu_ratio(B, y0, y1):
    """``2B^2 [4 e^{-(y0+y1)/2} sinh^2(B/2) - (e^{-y1/2} - e^{-y0/2})^2] / sinh^2 B``.

    Roots of ``ratio = 1`` are the admissible B.
    """
    B = np.asarray(B, dtype=float)
    s = np.sinh(B / 2)
    # sinh^2 B = 4 sinh^2(B/2) cosh^2(B/2)
    lead = 2 * B * B * math.exp(-(y0 + y1) / 2) / np.cosh(B / 2) ** 2
    gap = (math.exp(-y1 / 2) - math.exp(-y0 / 2)) ** 2
    if gap == 0.0:
        return lead
    return lead - 2 * B * B * gap / (4 * s * s * np.cosh(B / 2) ** 2)


def bratu_residual(B: float, y0: float, y1: float) -> float:
    """Residual of the implicit equation for B, relative to ``sinh^2 B``."""
    return float(1.0 - _bratu_ratio(B, y0, y1))


def _bratu_C(B, y0, y1):
    arg = math.sqrt(2) * math.exp(-y0 / 2) * B
    if arg < 1.0:
        arg = 1.0
    c = math.acosh(arg)
    if y0 == y1:
        return -B / 2
    target = math.sqrt(2) * math.exp(-y1 / 2) * B
    return min((-c, c), key=lambda cc: abs(math.cosh(B + cc) - target))


def bratu_constants(y0: float, y1: float, b_max: float = 50.0) -> list[BratuConstants]:
    """All admissible ``(B, C)`` for Bratu boundary values ``y(0)=y0, y(1)=y1``.

    Sign changes of ``1 - ratio(B)`` on a log grid are refined by Brent's
    method.  A grid maximum of the ratio within ``TANGENT_TOL`` of one is
    treated as a double (tangent) root.
    """
    grid = np.geomspace(1e-3, b_max, 4000)
    with np.errstate(over="ignore", invalid="ignore"):
        r = 1.0 - _bratu_ratio(grid, y0, y1)
    roots = []
    for i in range(len(grid) - 1):
        if not (np.isfinite(r[i]) and np.isfinite(r[i + 1])):
            continue
        if r[i] == 0.0:
            roots.append(grid[i])
        elif r[i] * r[i + 1] < 0:
            roots.append(brentq(bratu_residual, grid[i], grid[i + 1], args=(y0, y1), xtol=1e-15, rtol=1e-15))
    roots = _merge_tangent(roots, y0, y1)
    if not roots:
        k = int(np.nanargmin(r))
        if 0 < k < len(grid) - 1 and r[k] <= TANGENT_TOL:
            res = minimize_scalar(
                bratu_residual,
                bracket=(grid[k - 1], grid[k], grid[k + 1]),
                args=(y0, y1),
                tol=1e-12,
            )
            if abs(res.fun) <= TANGENT_TOL:
                roots.append(float(res.x))
    return [BratuConstants(float(B), float(_bratu_C(B, y0, y1))) for B in roots]


def _merge_tangent(roots, y0, y1):
    # two roots straddling a shallow extremum are one double root up to
    # rounding of the boundary data
    out = []
    i = 0
    while i < len(roots):
        if i + 1 < len(roots):
            a, b = roots[i], roots[i + 1]
            res = minimize_scalar(
                lambda B: -abs(bratu_residual(B, y0, y1)), bounds=(a, b), method="bounded",
                options={"xatol": 1e-12},
            )
            if -res.fun <= TANGENT_TOL:
                out.append(float(res.x))
                i += 2
                continue
        out.append(roots[i])
        i += 1
    return out


def bratu_tangent() -> tuple[float, float]:
    """``(B*, ybar*)``: the symmetric boundary value where the two roots merge."""
    res = minimize_scalar(lambda B: -math.sqrt(2) * B / math.cosh(B / 2), bracket=(1.0, 2.4, 4.0), tol=1e-12)
    B = float(res.x)
    return B, 2 * math.log(math.sqrt(2) * B / math.cosh(B / 2))


# -- catalog ------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    name: str
    factory: Callable[..., ODEProblem]
    defaults: dict = field(default_factory=dict)
    notes: str = ""

    def build(self, **kw) -> ODEProblem:
        args = dict(self.defaults)
        unknown = set(kw) - set(args)
        if unknown:
            raise ValueError(f"{self.name}: unknown parameter(s) {sorted(unknown)}")
        args.update(kw)
        return self.factory(**args)


def example1(xi: float = 0.1) -> ODEProblem:
    """``xi y'' - y = 0``, ``y(0)=1``, ``y(1)=0``."""
    s = math.sqrt(xi)

    def exact(x):
        x = np.asarray(x, dtype=float)
        return (np.exp(-x / s) - np.exp((x - 2) / s)) / (1 - math.exp(-2 / s))

    return ODEProblem("xi", "-y", BoundaryCondition("bvp", 0.0, 1.0, 1.0, 0.0), {"xi": xi}, exact, "example1")


def bratu(y0: float = 1.0, y1: float = 1.0, branch: int = 0) -> ODEProblem:
    """``exp(-y) y'' + 1 = 0`` on [0, 1]; ``branch`` picks the exact solution."""
    consts = bratu_constants(y0, y1)
    exact = consts[branch].solution() if branch < len(consts) else None
    return ODEProblem("exp(-y)", "1", BoundaryCondition("bvp", 0.0, 1.0, y0, y1), {}, exact, "bratu")


def bratu_z(y0: float = 1.0, y1: float = 1.0, branch: int = 0) -> ODEProblem:
    """Bratu in ``z = exp(-y)``: ``z z'' - z - z'^2 = 0``."""
    consts = bratu_constants(y0, y1)
    exact = consts[branch].z_solution() if branch < len(consts) else None
    bc = BoundaryCondition("bvp", 0.0, 1.0, math.exp(-y0), math.exp(-y1))
    return ODEProblem("y", "-y - dy^2", bc, {}, exact, "bratu_z")


def example3(xi: float = 2.2) -> ODEProblem:
    """``y'' + xi (y' + y^2) = 0``, ``y(0)=0``, ``y(1)=1``; no closed form."""
    bc = BoundaryCondition("bvp", 0.0, 1.0, 0.0, 1.0)
    return ODEProblem("1", "xi*(dy + y^2)", bc, {"xi": xi}, None, "example3")


def _lane_emden_y(m):
    if m == 0:
        return lambda x: 1 - np.asarray(x, dtype=float) ** 2 / 6
    if m == 1:
        return lambda x: np.sinc(np.asarray(x, dtype=float) / np.pi)
    if m == 5:
        return lambda x: 1 / np.sqrt(1 + np.asarray(x, dtype=float) ** 2 / 3)
    return None


def lane_emden(m: float = 0, T: float = 1.0) -> ODEProblem:
    """``y'' + 2y'/x + y^m = 0``, ``y(0)=1``, ``y'(0)=0`` on [0, T].

    ``2*dy/x`` is singular at x = 0.  The series lift cancels the common zero
    of numerator and denominator, which realizes the limit 2 y''(0).
    """
    bc = BoundaryCondition("ivp", 0.0, T, 1.0, 0.0)
    return ODEProblem("1", "2*dy/x + y^m", bc, {"m": m}, _lane_emden_y(m), "lane_emden")


def lane_emden_u(m: float = 2, T: float = 5.0) -> ODEProblem:
    """``u = x y``: ``u'' + x^(1-m) u^m = 0``, ``u(0)=0``, ``u'(0)=1``.

    Written as ``x (u/x)^m`` so integer ``m`` lifts without a pole.
    """
    ye = _lane_emden_y(m)
    exact = None if ye is None else (lambda x, ye=ye: np.asarray(x, dtype=float) * ye(x))
    bc = BoundaryCondition("ivp", 0.0, T, 0.0, 1.0)
    return ODEProblem("1", "x*(y/x)^m", bc, {"m": m}, exact, "lane_emden_u")


def linear(a: float = -1.0, b: float = -2.0, c: float = 1.0, y0: float = 0.0, y1: float = 1.0, T: float = 1.0, kind: str = "ivp") -> ODEProblem:
    """``y'' + a y' + b y + c = 0``: solved exactly at order 0 by ``p = (1, a, b, c)``."""
    bc = BoundaryCondition(kind, 0.0, T, y0, y1)
    return ODEProblem("1", "a*dy + b*y + c", bc, {"a": a, "b": b, "c": c}, _linear_exact(a, b, c, bc), "linear")


def _linear_exact(a, b, c, bc):
    from .funcspace import ChebFun
    from .linsolve import LinearParams, solve_linear

    try:
        sol = solve_linear(LinearParams(1.0, a, b), ChebFun([-c], bc.interval), bc)
    except Exception:  # resonant data: no reference solution
        return None
    return sol


CATALOG = {
    "example1": CatalogEntry("example1", example1, {"xi": 0.1}, "exact solution: two decaying exponentials"),
    "bratu": CatalogEntry("bratu", bratu, {"y0": 1.0, "y1": 1.0, "branch": 0}, "B from the implicit equation; B1=1.51812, B2=3.5675 for y0=y1=1"),
    "bratu_z": CatalogEntry("bratu_z", bratu_z, {"y0": 1.0, "y1": 1.0, "branch": 0}, "z = exp(-y)"),
    "example3": CatalogEntry("example3", example3, {"xi": 2.2}, "critical xi near 3.768"),
    "lane_emden": CatalogEntry("lane_emden", lane_emden, {"m": 0, "T": 1.0}, "exact for m in {0, 1, 5}"),
    "lane_emden_u": CatalogEntry("lane_emden_u", lane_emden_u, {"m": 2, "T": 5.0}, "u = x y; exact for m in {0, 1, 5}"),
    "linear": CatalogEntry("linear", linear, {"a": -1.0, "b": -2.0, "c": 1.0, "y0": 0.0, "y1": 1.0, "T": 1.0, "kind": "ivp"}, "order 0 is exact with p = (1, a, b, c)"),
}


def catalog() -> list[CatalogEntry]:
    return list(CATALOG.values())


def get_problem(name: str, **params) -> ODEProblem:
    try:
        entry = CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown catalog problem {name!r}; choose from {sorted(CATALOG)}") from None
    return entry.build(**params)
