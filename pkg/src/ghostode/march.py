"""Piecewise application of the scheme over a long initial-value horizon.

Each piece optimizes the operator parameters on ``[x_c, x_c + T]``; pieces
whose distance misses the target are retried on a shorter interval.  An
accepted piece ends at a zero of its pointwise residual near ``x_c + T`` and
hands its value and slope to the next piece as initial data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .exceptions import INFEASIBLE, EmptyGridError, GhostODEError, StallError
from .funcspace import ChebFun, restrict
from .linsolve import BoundaryCondition, LinearParams
from .metrics import d1, residual
from .optimize import MinimaRecord, ParamSpec, SearchRange, distance, polish, scan_minima
from .recurrence import ODEProblem, expand, partial_sum_derivs

KNOT_SAMPLES = 201
WARM_FACTOR = 3.0
WARM_POINTS = 41


@dataclass(frozen=True)
class MarchConfig:
    order: int
    d_max: float
    T0: float
    horizon: float
    shrink: float = 0.75
    grow: float = 9.0 / 8.0
    max_pieces: int = 1000

    def __post_init__(self):
        if not 0 < self.shrink < 1 < self.grow:
            raise ValueError("need 0 < shrink < 1 < grow")
        if not self.d_max > 0:
            raise ValueError("d_max must be positive")
        if not self.T0 > 0 or not self.horizon > 0:
            raise ValueError("T0 and horizon must be positive")
        if self.order < 0 or self.max_pieces < 1:
            raise ValueError("order must be >= 0 and max_pieces >= 1")


@dataclass
class PiecewiseSolution:
    """Pieces on consecutive intervals ``[knots[i], knots[i+1]]``."""

    knots: list[float] = field(default_factory=list)
    pieces: list[ChebFun] = field(default_factory=list)
    d1: list[float] = field(default_factory=list)
    params: list[LinearParams] = field(default_factory=list)
    complete: bool = True

    @property
    def total_d1(self) -> float:
        """Sum of per-piece distances; error propagation is not corrected."""
        return float(sum(self.d1))

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.knots, x, side="right") - 1
        return x, np.clip(idx, 0, len(self.pieces) - 1)

    def __call__(self, x, k: int = 0):
        x, idx = self._locate(x)
        out = np.empty_like(x)
        for i in np.unique(idx):
            f = self.pieces[i] if k == 0 else self.pieces[i].derivative(k)
            m = idx == i
            out[m] = f(x[m])
        return out

    def continuity(self) -> tuple[float, float]:
        """Largest jump in value and in slope over the interior knots."""
        dv = ds = 0.0
        for i in range(1, len(self.pieces)):
            x = self.knots[i]
            left, right = self.pieces[i - 1], self.pieces[i]
            dv = max(dv, abs(float(left(x)) - float(right(x))))
            ds = max(ds, abs(float(left.derivative()(x)) - float(right.derivative()(x))))
        return dv, ds

    def sample(self, problem: ODEProblem, n: int = 201) -> np.ndarray:
        """Rows ``x, y, dy, residual`` on ``n`` uniform points."""
        x = np.linspace(self.knots[0], self.knots[-1], n)
        _, idx = self._locate(x)
        rows = np.empty((n, 4))
        rows[:, 0] = x
        for i in np.unique(idx):
            m = idx == i
            f = self.pieces[i]
            r = residual(problem, f)
            rows[m, 1] = f(x[m])
            rows[m, 2] = f.derivative()(x[m])
            rows[m, 3] = r(x[m])
        return rows

    def to_json(self) -> dict:
        return {
            "knots": list(map(float, self.knots)),
            "complete": self.complete,
            "pieces": [
                {
                    "interval": list(map(float, f.interval)),
                    "params": dict(zip(("p0", "p1", "p2", "p3", "epsilon"), map(float, p.as_tuple()))),
                    "d1": float(d),
                    "coeffs": [float(c) for c in f.coeffs],
                }
                for f, d, p in zip(self.pieces, self.d1, self.params)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseSolution":
        pieces = [ChebFun(np.array(p["coeffs"]), tuple(p["interval"]), trim=False) for p in data["pieces"]]
        params = [LinearParams(**p["params"]) for p in data["pieces"]]
        return cls(list(data["knots"]), pieces, [p["d1"] for p in data["pieces"]], params, data.get("complete", True))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _scaled(spec: ParamSpec, factor: float) -> ParamSpec:
    """Search ranges and fixed p0 scaled for an interval ``factor`` times longer."""
    search = {}
    for k, r in spec.search.items():
        search[k] = SearchRange(r.lo * factor, r.hi * factor, r.num, r.scale) if k == "p0" else r
    values = dict(spec.values)
    if "p0" not in spec.search:
        values["p0"] = values["p0"] * factor
    return ParamSpec(values, search)


def _best(records: list[MinimaRecord]) -> MinimaRecord | None:
    return min(records, key=lambda r: r.d_star) if records else None


def _optimize_piece(sub: ODEProblem, n: int, spec: ParamSpec, warm: dict | None):
    """Best ``(point, d)`` on the piece, warm-started near ``warm`` if given."""
    candidates = []
    if warm is not None and "p0" in spec.search:
        p0 = warm["p0"]
        local = spec.with_search(p0=SearchRange(p0 / WARM_FACTOR, p0 * WARM_FACTOR, WARM_POINTS, "log"))
        try:
            rec = _best(scan_minima(sub, n, local))
        except EmptyGridError:
            rec = None
        if rec is not None:
            candidates.append((rec.point, rec.d_star))
    if not candidates:
        try:
            rec = _best(scan_minima(sub, n, spec))
        except EmptyGridError:
            rec = None
        if rec is not None:
            candidates.append((rec.point, rec.d_star))
    if not candidates and warm is not None:
        point, f = polish(sub, n, spec, {k: warm[k] for k in spec.searched})
        candidates.append((point, 10.0**f if np.isfinite(f) else np.inf))
    if not spec.searched:
        candidates.append(({}, distance(sub, spec.params(), n)))
    if not candidates:
        return None, np.inf
    return min(candidates, key=lambda c: c[1])


def _knot(sub: ODEProblem, y: ChebFun, dy: ChebFun, d2y: ChebFun, xc: float, T: float) -> float:
    """Residual zero nearest ``xc + T`` in ``[xc + T/2, xc + T]``; else ``xc + T``."""
    r = residual(sub, y, dy, d2y)
    xs = np.linspace(xc + T / 2, xc + T, KNOT_SAMPLES)
    v = r(xs)
    for i in range(len(xs) - 1, 0, -1):
        if v[i] == 0.0:
            return float(xs[i])
        if v[i - 1] * v[i] < 0:
            return float(brentq(lambda t: float(r(t)), xs[i - 1], xs[i], xtol=1e-14))
    return xc + T


def march(problem: ODEProblem, cfg: MarchConfig, spec: ParamSpec | None = None) -> PiecewiseSolution:
    """Cover ``[a, a + horizon]`` with optimized pieces of distance ``<= d_max``.

    ``spec`` describes the search for an interval of length ``T0``; p0 ranges
    are rescaled in proportion to each piece's length.
    """
    if problem.kind != "ivp":
        raise ValueError("march needs an initial-value problem")
    spec = ParamSpec.default(T=cfg.T0) if spec is None else spec
    a = problem.interval[0]
    end = a + cfg.horizon
    xc = a
    y0, y1 = problem.bc.value_left, problem.bc.value_right
    T = cfg.T0
    warm = None
    warm_T = None
    sol = PiecewiseSolution(knots=[a])
    n = cfg.order
    while end - xc > 1e-12 * max(1.0, abs(end)):
        if len(sol.pieces) >= cfg.max_pieces:
            sol.complete = False
            break
        Tp = min(T, end - xc)
        sub = problem.with_bc(BoundaryCondition("ivp", xc, xc + Tp, y0, y1))
        piece_spec = _scaled(spec, Tp / cfg.T0)
        w = None if warm is None else {k: v * (Tp / warm_T if k == "p0" else 1.0) for k, v in warm.items()}
        point, d = _optimize_piece(sub, n, piece_spec, w)
        if point is None or not d <= cfg.d_max:
            T = cfg.shrink * T
            if T < 1e-3 * cfg.T0:
                raise StallError(f"no piece at x={xc:.6g} reached d1 <= {cfg.d_max:g}; last d1 {d:.3g}")
            continue
        p = piece_spec.params(point)
        try:
            e = expand(sub, p, n)
        except INFEASIBLE as err:
            raise GhostODEError(f"optimum became infeasible on re-expansion: {err}") from None
        y, dy, d2y = partial_sum_derivs(e, n)
        x_star = end if xc + Tp >= end - 1e-12 * max(1.0, abs(end)) else _knot(sub, y, dy, d2y, xc, Tp)
        piece = y if x_star == xc + Tp else restrict(y, (xc, x_star))
        sub_piece = problem.with_bc(BoundaryCondition("ivp", xc, x_star, y0, y1))
        dp = d1(sub_piece, piece)
        sol.pieces.append(piece)
        sol.d1.append(dp)
        sol.params.append(p)
        sol.knots.append(float(x_star))
        y0, y1 = float(piece(x_star)), float(piece.derivative()(x_star))
        xc = float(x_star)
        warm, warm_T = dict(point), Tp
        T = cfg.grow * T
    return sol
