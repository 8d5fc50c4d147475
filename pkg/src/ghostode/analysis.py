"""Post-processing of optimized sequences.

``ghost_expansion`` rewrites a sequence of optimized partial sums as
``sum_m w_m(x) d*(m)``, using the achieved distance as the small parameter.
``linear_correction`` applies one Newton step to an approximate solution:
the equation is linearized around it and the correction is found by
Chebyshev collocation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as ex
from .exceptions import CorrectionFailedError
from .funcspace import ChebFun, chebpts
from .metrics import d1
from .optimize import SequenceRecord
from .recurrence import ODEProblem

WEIGHT_SPREAD = 100.0
MAX_COLLOCATION = 1024


@dataclass(frozen=True)
class GhostTerm:
    m: int
    w: ChebFun
    d_star: float


@dataclass(frozen=True)
class GhostExpansion:
    """Terms ``(m, w_m, d*(m))`` whose partial sums telescope to the members."""

    sequence_id: tuple[int, int]
    terms: tuple[GhostTerm, ...]
    truncated_at: int | None = None

    def reconstruct(self, M: int | None = None) -> ChebFun:
        """``sum_{m <= M} w_m d*(m)``; all terms when ``M`` is None."""
        terms = [t for t in self.terms if M is None or t.m <= M]
        if not terms:
            raise ValueError("no terms up to the requested order")
        acc = terms[0].w * terms[0].d_star
        for t in terms[1:]:
            acc = acc + t.w * t.d_star
        return acc

    def weight_norms(self) -> np.ndarray:
        return np.array([np.max(np.abs(t.w.values(max(2 * t.w.length, 64)))) for t in self.terms])

    @property
    def bounded(self) -> bool:
        """Weights stay within a factor ``WEIGHT_SPREAD`` of each other."""
        w = self.weight_norms()[1:]
        w = w[w > 0]
        if len(w) < 2:
            return True
        return bool(w.max() <= WEIGHT_SPREAD * w.min())

    def to_json(self) -> dict:
        return {
            "id": list(self.sequence_id),
            "truncated_at": self.truncated_at,
            "bounded": self.bounded,
            "terms": [{"m": t.m, "d_star": t.d_star, "w": t.w.to_json()} for t in self.terms],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GhostExpansion":
        terms = tuple(GhostTerm(int(t["m"]), ChebFun.from_json(t["w"]), float(t["d_star"])) for t in data["terms"])
        return cls(tuple(data["id"]), terms, data.get("truncated_at"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def ghost_expansion(seq: SequenceRecord, members: Sequence[ChebFun], d_stars: Sequence[float] | None = None) -> GhostExpansion:
    """``w_0 = y*_0 / d*(0)`` and ``w_m = (y*_m - y*_{m-1}) / d*(m)``.

    ``members[i]`` is the optimized partial sum of ``seq.members[i]``;
    ``m`` is that member's order.  A member with ``d* = 0`` reached the exact
    solution and ends the expansion.
    """
    if len(members) != len(seq.members):
        raise ValueError("one member function per sequence member is required")
    ds = [r.d_star for r in seq.members] if d_stars is None else list(d_stars)
    terms = []
    prev = None
    truncated = None
    for rec, y, d in zip(seq.members, members, ds):
        if d == 0.0:
            truncated = rec.n
            break
        diff = y if prev is None else y - prev
        terms.append(GhostTerm(rec.n, diff * (1.0 / d), float(d)))
        prev = y
    return GhostExpansion(tuple(seq.id), tuple(terms), truncated)


# -- linearized correction ------------------------------------------------------

def cheb_diff_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Differentiation matrix on ``n + 1`` second-kind points of [-1, 1], ascending."""
    if n == 0:
        return np.zeros((1, 1)), np.array([0.0])
    x = chebpts(n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (X + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


def linearization(problem: ODEProblem, y: ChebFun, x: np.ndarray):
    """``A, B, C, R`` of ``A z'' + B z' + C z = -R`` at the points ``x``."""
    dy, d2y = y.derivative(), y.derivative(2)
    yv, dyv, d2v = y(x), dy(x), d2y(x)
    params = problem.params

    def ev(e):
        return np.broadcast_to(ex.eval_scalar(e, x, yv, dyv, params), x.shape).astype(float)

    g, h = problem.g, problem.h
    A = ev(g)
    B = ev(ex.differentiate(g, "dy")) * d2v + ev(ex.differentiate(h, "dy"))
    C = ev(ex.differentiate(g, "y")) * d2v + ev(ex.differentiate(h, "y"))
    R = A * d2v + ev(h)
    return A, B, C, R


def linear_correction(problem: ODEProblem, y_approx: ChebFun, degree: int | None = None) -> ChebFun:
    """Correction ``z`` from the equation linearized around ``y_approx``.

    Boundary data are homogeneous, so ``y_approx + z`` keeps the original
    data.  Raises ``CorrectionFailedError`` for a singular system or when
    ``d1`` does not decrease.
    """
    a, b = problem.interval
    n = degree if degree is not None else min(2 * y_approx.degree + 32, MAX_COLLOCATION)
    D, t = cheb_diff_matrix(n)
    x = 0.5 * (b - a) * t + 0.5 * (a + b)
    D = D * (2.0 / (b - a))
    D2 = D @ D
    # coefficients at interior nodes only: endpoint rows carry the side conditions
    inner = slice(1, n)
    with np.errstate(all="ignore"):
        A, B, C, R = linearization(problem, y_approx, x[inner])
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B)) and np.all(np.isfinite(C)) and np.all(np.isfinite(R))):
        raise CorrectionFailedError("linearized coefficients are not finite")
    if np.min(np.abs(A)) == 0.0:
        raise CorrectionFailedError("g vanishes along the approximation")
    M = np.zeros((n + 1, n + 1))
    rhs = np.zeros(n + 1)
    M[inner] = A[:, None] * D2[inner] + B[:, None] * D[inner] + C[:, None] * np.eye(n + 1)[inner]
    rhs[inner] = -R
    if problem.kind == "bvp":
        M[0] = np.eye(n + 1)[0]
        M[n] = np.eye(n + 1)[n]
    else:
        M[0] = np.eye(n + 1)[0]
        M[n] = D[0]
    try:
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > 1e14:
            raise np.linalg.LinAlgError(f"condition number {cond:.3g}")
        z = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as err:
        raise CorrectionFailedError(f"singular collocation system: {err}") from None
    zf = ChebFun.from_values(z, (a, b))
    before = d1(problem, y_approx)
    after = d1(problem, y_approx + zf)
    if not after <= before:
        raise CorrectionFailedError(f"d1 increased from {before:.3e} to {after:.3e}")
    return zf


def refine(problem: ODEProblem, y: ChebFun, steps: int = 1) -> list[ChebFun]:
    """Iterates ``y, y + z_1, ...``; stops early when a correction fails."""
    out = [y]
    for _ in range(steps):
        try:
            z = linear_correction(problem, out[-1])
        except CorrectionFailedError:
            break
        out.append(out[-1] + z)
    return out
