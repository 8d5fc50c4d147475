"""Constant-coefficient solves of ``p0 y'' + p1 y' + p2 y = F``.

The operator factors as ``p0 (D - r+)(D - r-)``.  Particular solutions are
built from first-order pieces ``u' - r u = F``, each anchored at the endpoint
where its kernel ``exp(r (x - s))`` decays, so no exponential ever exceeds one.
The homogeneous basis is anchored the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

from .exceptions import ConvergenceError, DivergenceError, ResonanceError
from .funcspace import MAX_DEGREE, ChebFun, integrate_cumulative, interpolate

DISC_TOL = 1e-12
RESONANCE_TOL = 1e-10


@dataclass(frozen=True)
class LinearParams:
    """Operator ``p0 d^2 + p1 d + p2`` plus the shift ``p3`` and ``epsilon``."""

    p0: float
    p1: float = 0.0
    p2: float = 0.0
    p3: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        if self.p0 == 0 or not math.isfinite(self.p0):
            raise ValueError("p0 must be finite and nonzero")

    def as_tuple(self):
        return (self.p0, self.p1, self.p2, self.p3)

    def replace(self, **kw) -> "LinearParams":
        d = dict(p0=self.p0, p1=self.p1, p2=self.p2, p3=self.p3, epsilon=self.epsilon)
        d.update(kw)
        return LinearParams(**d)


@dataclass(frozen=True)
class RootData:
    """Characteristic roots; ``w_plus`` is the root with larger real part."""

    kind: str  # double-integration | real-distinct | real-repeated | complex-pair
    w_plus: complex | float
    w_minus: complex | float
    w: complex | float


@dataclass(frozen=True)
class BoundaryCondition:
    """BVP: y(x_left), y(x_right).  IVP: y(x_left), y'(x_left)."""

    kind: str
    x_left: float
    x_right: float
    value_left: float
    value_right: float

    def __post_init__(self):
        if self.kind not in ("bvp", "ivp"):
            raise ValueError(f"boundary kind must be 'bvp' or 'ivp', got {self.kind!r}")
        if not self.x_left < self.x_right:
            raise ValueError("x_left must be smaller than x_right")

    @property
    def interval(self):
        return (float(self.x_left), float(self.x_right))

    def homogeneous(self) -> "BoundaryCondition":
        return BoundaryCondition(self.kind, self.x_left, self.x_right, 0.0, 0.0)

    def with_values(self, left, right) -> "BoundaryCondition":
        return BoundaryCondition(self.kind, self.x_left, self.x_right, left, right)


def characteristic_roots(p: LinearParams) -> RootData:
    p0, p1, p2 = float(p.p0), float(p.p1), float(p.p2)
    if p0 == 0:
        raise ValueError("p0 must be nonzero")
    if p1 == 0 and p2 == 0:
        return RootData("double-integration", 0.0, 0.0, 0.0)
    disc = p1 * p1 - 4 * p0 * p2
    if abs(disc) <= DISC_TOL * max(p1 * p1, abs(4 * p0 * p2)):
        r = -p1 / (2 * p0)
        return RootData("real-repeated", r, r, 0.0)
    if disc > 0:
        s = math.sqrt(disc)
        # cancellation-free pair
        q = -0.5 * (p1 + math.copysign(s, p1)) if p1 != 0 else 0.5 * s
        if p1 != 0:
            r1, r2 = q / p0, p2 / q
        else:
            r1, r2 = s / (2 * p0), -s / (2 * p0)
        hi, lo = max(r1, r2), min(r1, r2)
        return RootData("real-distinct", hi, lo, hi - lo)
    s = math.sqrt(-disc)
    alpha = -p1 / (2 * p0)
    omega = abs(s / (2 * p0))
    return RootData("complex-pair", complex(alpha, omega), complex(alpha, -omega), complex(0, 2 * omega))


@lru_cache(maxsize=64)
def _cum_matrix(n: int) -> np.ndarray:
    """Coefficient-space integration from -1, truncated to degree ``n``."""
    q = C.chebint(np.eye(n + 1), lbnd=-1, axis=0)[: n + 1]
    q.setflags(write=False)
    return q


def _first_order(lam: complex, f: np.ndarray, half: float, n: int, right: bool) -> np.ndarray:
    """Coefficients of ``u`` with ``u' - lam u = f`` and u = 0 at one end."""
    q = _cum_matrix(n)
    if right:
        q = q - np.outer(np.eye(n + 1)[0], q.sum(axis=0))
    fc = np.zeros(n + 1, dtype=complex if isinstance(lam, complex) else float)
    fc[: len(f)] = f
    a = np.eye(n + 1) - (lam * half) * q
    return np.linalg.solve(a, half * (q @ fc))


def particular_kernel(lam, f: np.ndarray, length: float) -> np.ndarray:
    """Chebyshev coefficients (possibly complex) of a solution of
    ``u' - lam u = f`` that vanishes at the endpoint where the kernel
    ``exp(lam (x - s))`` decays."""
    half = length / 2.0
    right = lam.real > 0 if isinstance(lam, complex) else lam > 0
    f = np.trim_zeros(np.asarray(f), "b")
    if f.size == 0:
        return np.zeros(1, dtype=np.result_type(f, lam))
    n = max(32, len(f) + 16, int(abs(lam) * half * 1.5) + 16)
    fscale = np.sum(np.abs(f)) * length
    while True:
        n = min(n, MAX_DEGREE)
        u = _first_order(lam, f, half, n, right)
        if not np.all(np.isfinite(u)):
            raise DivergenceError("first-order kernel overflowed")
        scale_ = max(np.max(np.abs(u)), fscale, 1e-300)
        m = max(4, (n + 1) // 16)
        if np.max(np.abs(u[-m:])) < 1e-15 * scale_:
            big = np.nonzero(np.abs(u) > 1e-16 * scale_)[0]
            return u[: big[-1] + 1] if big.size else u[:1]
        if n >= MAX_DEGREE:
            raise ConvergenceError(f"kernel did not resolve at degree {MAX_DEGREE}")
        n *= 2


class _Homogeneous:
    """Endpoint-anchored homogeneous basis with values and slopes at ends."""

    def __init__(self, roots: RootData, interval, left_only: bool = False):
        self.roots = roots
        self.interval = interval
        a, b = interval
        kind = roots.kind
        if kind == "double-integration":
            self.funcs = (lambda x: np.ones_like(x), lambda x: (x - a) / (b - a))
            self.d = (lambda x: 0.0 * x, lambda x: np.ones_like(x) / (b - a))
        elif kind == "real-distinct" and roots.w * (b - a) >= 1.0:
            pairs = [_exp_pair(r, a, b, left_only) for r in (roots.w_plus, roots.w_minus)]
            self.funcs, self.d = zip(*pairs)
        elif kind in ("real-distinct", "real-repeated"):
            # e^{r- s} and e^{r- s} expm1(w s)/(w L): the second tends to the
            # repeated-root partner s e^{r s}/L as the gap w closes
            r, w, L = roots.w_minus, roots.w, b - a
            mean = r + w / 2
            x0 = b if mean > 0 and not left_only else a

            def g2(s):
                return np.expm1(w * s) / (w * L) if w else s / L

            def dg2(s):
                return np.exp(w * s) / L

            self.funcs = (
                lambda x: np.exp(r * (x - x0)),
                lambda x: np.exp(r * (x - x0)) * g2(x - x0),
            )
            self.d = (
                lambda x: r * np.exp(r * (x - x0)),
                lambda x: np.exp(r * (x - x0)) * (r * g2(x - x0) + dg2(x - x0)),
            )
        else:
            al, om = roots.w_plus.real, roots.w_plus.imag
            x0 = b if al > 0 and not left_only else a
            k = 1.0 / min(om * (b - a), 1.0)
            self.funcs = (
                lambda x: np.exp(al * (x - x0)) * np.cos(om * (x - a)),
                lambda x: k * np.exp(al * (x - x0)) * np.sin(om * (x - a)),
            )
            self.d = (
                lambda x: np.exp(al * (x - x0)) * (al * np.cos(om * (x - a)) - om * np.sin(om * (x - a))),
                lambda x: k * np.exp(al * (x - x0)) * (al * np.sin(om * (x - a)) + om * np.cos(om * (x - a))),
            )
        self._cheb = [None, None]

    def cheb(self, i) -> ChebFun:
        if self._cheb[i] is None:
            self._cheb[i] = interpolate(self.funcs[i], self.interval, tol=1e-14)
        return self._cheb[i]


def _exp_pair(r, a, b, left_only):
    x0 = b if r > 0 and not left_only else a
    return (lambda x: np.exp(r * (x - x0))), (lambda x: r * np.exp(r * (x - x0)))


class LinearSolver:
    """Reusable solver for one operator on one interval.

    The homogeneous basis and boundary matrices are built once; each call to
    :meth:`solve` only computes a particular solution.
    """

    def __init__(self, p: LinearParams, interval, kind: str):
        self.p = p
        self.interval = (float(interval[0]), float(interval[1]))
        self.kind = kind
        self.roots = characteristic_roots(p)
        # initial data sit at the left end; a left anchor keeps the 2x2 system tame
        self.hom = _Homogeneous(self.roots, self.interval, left_only=kind == "ivp")
        a, b = self.interval
        if self.roots.kind == "complex-pair" and kind == "bvp":
            om = self.roots.w_plus.imag
            if abs(math.sin(om * (b - a))) < RESONANCE_TOL:
                raise ResonanceError(f"resonant operator: omega*(b-a) = {om * (b - a):.12g}")
        f1, f2 = self.hom.funcs
        if kind == "bvp":
            m = np.array([[f1(a), f2(a)], [f1(b), f2(b)]], dtype=float)
        else:
            d1, d2 = self.hom.d
            m = np.array([[f1(a), f2(a)], [d1(a), d2(a)]], dtype=float)
        if not np.all(np.isfinite(m)):
            raise DivergenceError("homogeneous basis overflowed")
        self._m = m
        self._m_ivp = None
        cond = np.linalg.cond(m / np.max(np.abs(m), axis=1, keepdims=True))
        if not np.isfinite(cond) or cond > 1e14:
            if kind == "bvp":
                raise ResonanceError("homogeneous boundary problem is singular")
            raise DivergenceError("initial-value basis is ill-conditioned")

    def particular(self, F: ChebFun) -> ChebFun:
        """A particular solution via ``p0 (D - r+)(D - r-) y = F``: two
        first-order solves, no division by the root gap."""
        p0 = self.p.p0
        r = self.roots
        iv = self.interval
        if r.kind == "double-integration":
            return ChebFun(integrate_cumulative(integrate_cumulative(F)).coeffs / p0, iv)
        L = F.length
        u = particular_kernel(r.w_minus, F.coeffs, L)
        y = particular_kernel(r.w_plus, u, L)
        return ChebFun(np.real(y) / p0, iv, vscale=F.vscale * L * L / abs(p0))

    def solve(self, F: ChebFun, left: float, right: float) -> ChebFun:
        if F.interval != self.interval:
            F = ChebFun(F.coeffs, self.interval)
        a, b = self.interval
        if self.roots.kind == "double-integration":
            return self._double(F, left, right)
        yp = self.particular(F)
        if self.kind == "bvp":
            rhs = np.array([left - yp(a), right - yp(b)])
        else:
            rhs = np.array([left - yp(a), right - yp.derivative()(a)])
        c = np.linalg.solve(self._ivp_matrix() if self.kind == "ivp" else self._m, rhs)
        if not np.all(np.isfinite(c)):
            raise DivergenceError("boundary constants overflowed")
        y = yp
        for i in range(2):
            if c[i] != 0.0:
                y = y + c[i] * self.hom.cheb(i)
        return y

    def _ivp_matrix(self):
        # slopes of the interpolated basis, so y'(a) holds for the returned ChebFun
        if self._m_ivp is None:
            a = self.interval[0]
            m = self._m.copy()
            m[1] = [float(self.hom.cheb(i).derivative()(a)) for i in range(2)]
            self._m_ivp = m
        return self._m_ivp

    def _double(self, F, left, right):
        a, b = self.interval
        p0 = self.p.p0
        ccf = integrate_cumulative(integrate_cumulative(F))
        if self.kind == "bvp":
            end = ccf(b)
            # y = left + xh (right - left) + (CCF - xh CCF(b)) / p0, xh = (x-a)/L
            c = ccf.coeffs / p0
            out = np.zeros(max(len(c), 2))
            out[: len(c)] += c
            # xh = (t + 1)/2 on the reference interval
            slope = (right - left) - end / p0
            out[0] += left + slope / 2.0
            out[1] += slope / 2.0
            return ChebFun(out, self.interval, vscale=max(abs(left), abs(right), F.vscale))
        c = ccf.coeffs / p0
        out = np.zeros(max(len(c), 2))
        out[: len(c)] += c
        L = b - a
        # left + right (x - a), x - a = L (t + 1)/2
        out[0] += left + right * L / 2.0
        out[1] += right * L / 2.0
        return ChebFun(out, self.interval, vscale=max(abs(left), abs(right) * L, F.vscale))


def solve_linear(p: LinearParams, F: ChebFun, bc: BoundaryCondition) -> ChebFun:
    """Solve ``p0 y'' + p1 y' + p2 y = F`` with the side conditions ``bc``."""
    solver = LinearSolver(p, bc.interval, bc.kind)
    return solver.solve(F, bc.value_left, bc.value_right)
