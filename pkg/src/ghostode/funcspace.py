"""Smooth functions on an interval held as Chebyshev coefficients.

Sampling uses Chebyshev points of the second kind; the degree is chosen
adaptively by doubling until the coefficient tail drops below the requested
tolerance.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.fft
from numpy.polynomial import chebyshev as C

from .exceptions import (
    ConvergenceError,
    IntervalMismatchError,
    OutOfDomainError,
    SingularLiftError,
)

# sampled data is chopped at the interpolation tolerance; algebraic results
# keep coefficients down to 1e-15 because second derivatives amplify a chop
# at degree N by roughly N^4
TRIM_TOL = 1e-15
MIN_DEGREE = 16
MAX_DEGREE = 4096


def chebpts(n: int) -> np.ndarray:
    """``n + 1`` second-kind points on [-1, 1], ascending."""
    if n == 0:
        return np.array([0.0])
    return -np.cos(np.pi * np.arange(n + 1) / n)


def chebpts1(n: int) -> np.ndarray:
    """``n`` first-kind (interior) points on [-1, 1], ascending."""
    return -np.cos(np.pi * (2 * np.arange(n) + 1) / (2 * n))


def vals2coeffs1(vals: np.ndarray) -> np.ndarray:
    """Coefficients of the interpolant through values at :func:`chebpts1`."""
    vals = np.asarray(vals, dtype=float)
    n = len(vals)
    c = scipy.fft.dct(vals[::-1], type=2) / n
    c[0] /= 2
    return c


def vals2coeffs(vals: np.ndarray) -> np.ndarray:
    """Coefficients of the interpolant through values at :func:`chebpts`."""
    vals = np.asarray(vals, dtype=float)
    n = len(vals) - 1
    if n == 0:
        return vals.copy()
    # chebpts are ascending, the DCT wants descending cos(pi k/n)
    v = vals[::-1]
    tmp = np.concatenate([v, v[-2:0:-1]])
    c = np.fft.rfft(tmp).real / n
    c[0] /= 2
    c[n] /= 2
    return c[: n + 1]


def coeffs2vals(coeffs: np.ndarray) -> np.ndarray:
    """Values at :func:`chebpts` of the series with these coefficients."""
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    if n == 0:
        return c.copy()
    b = c.copy()
    b[1:n] /= 2
    tmp = np.concatenate([b, b[-2:0:-1]])
    v = np.fft.rfft(tmp).real[: n + 1]
    return v[::-1]


def _trim(c: np.ndarray, tol: float = TRIM_TOL, vscale: float | None = None) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        return np.zeros(1)
    if not np.all(np.isfinite(c)):
        raise OverflowError("non-finite Chebyshev coefficient")
    scale = np.max(np.abs(c))
    if vscale is not None:
        scale = max(scale, vscale)
    if scale == 0.0:
        return np.zeros(1)
    big = np.nonzero(np.abs(c) > tol * scale)[0]
    if big.size == 0:
        return np.zeros(1)
    return c[: big[-1] + 1].copy()


class ChebFun:
    """Chebyshev series on ``interval``.

    Instances are treated as immutable; every operation returns a new one.
    """

    __slots__ = ("coeffs", "interval")

    def __init__(self, coeffs, interval=(-1.0, 1.0), *, trim: bool = True, vscale=None):
        a, b = float(interval[0]), float(interval[1])
        if not a < b:
            raise ValueError(f"interval must satisfy a < b, got {interval}")
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        self.coeffs = _trim(c, vscale=vscale) if trim else c.copy()
        self.coeffs.setflags(write=False)
        self.interval = (a, b)

    # -- construction ---------------------------------------------------
    @classmethod
    def constant(cls, value: float, interval) -> "ChebFun":
        return cls([value], interval)

    @classmethod
    def identity(cls, interval) -> "ChebFun":
        a, b = interval
        return cls([(a + b) / 2, (b - a) / 2], interval)

    @classmethod
    def from_values(cls, vals, interval, **kw) -> "ChebFun":
        return cls(vals2coeffs(vals), interval, **kw)

    # -- basic properties -------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def vscale(self) -> float:
        """Cheap bound on the sup norm."""
        return float(np.sum(np.abs(self.coeffs)))

    def _to_ref(self, x):
        a, b = self.interval
        return (2.0 * np.asarray(x, dtype=float) - a - b) / (b - a)

    def points(self, n: int) -> np.ndarray:
        a, b = self.interval
        return _map_pts(chebpts(n), a, b)

    def values(self, n: int | None = None) -> np.ndarray:
        """Samples at the ``n + 1`` Chebyshev points of the interval."""
        n = self.degree if n is None else n
        if n >= self.degree:
            c = np.zeros(n + 1)
            c[: len(self.coeffs)] = self.coeffs
            return coeffs2vals(c)
        return C.chebval(chebpts(n), self.coeffs)

    # -- calculus -------------------------------------------------------------
    def __call__(self, x):
        return evaluate(self, x)

    def derivative(self, k: int = 1) -> "ChebFun":
        out = self
        for _ in range(k):
            out = differentiate(out)
        return out

    def cumsum(self) -> "ChebFun":
        return integrate_cumulative(self)

    def sum(self) -> float:
        return integrate_definite(self)

    def norm(self) -> float:
        return l2_norm(self)

    # -- arithmetic -------------------------------------------------------------
    def _other(self, other):
        if isinstance(other, ChebFun):
            _check_same(self, other)
            return other
        return ChebFun([float(other)], self.interval)

    def __add__(self, other):
        if not isinstance(other, ChebFun):
            c = self.coeffs.copy()
            c[0] += float(other)
            return ChebFun(c, self.interval, vscale=max(self.vscale, abs(float(other))))
        return combine(self, other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0 * self._other(other))

    def __rsub__(self, other):
        return (-1.0 * self) + other

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, ChebFun):
            return combine(self, other, "multiply")
        return scale(self, float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ChebFun):
            return divide(self, other)
        return scale(self, 1.0 / float(other))

    def __repr__(self):
        a, b = self.interval
        return f"ChebFun(degree={self.degree}, interval=[{a:g}, {b:g}])"

    # -- serialization ------------------------------------------------------------
    def to_json(self) -> dict:
        return {"interval": list(self.interval), "coeffs": [float(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict) -> "ChebFun":
        return cls(obj["coeffs"], tuple(obj["interval"]), trim=False)


def _map_pts(t, a, b):
    x = a + (t + 1.0) * (b - a) / 2.0
    if np.ndim(x) and len(x) > 1:
        x[0], x[-1] = a, b
    return x


def _check_same(f: ChebFun, g: ChebFun):
    if f.interval != g.interval:
        raise IntervalMismatchError(f"interval mismatch: {f.interval} vs {g.interval}")


def interpolate(
    f: Callable[[np.ndarray], np.ndarray],
    interval: Sequence[float],
    tol: float = 1e-13,
    max_degree: int = MAX_DEGREE,
    min_degree: int = MIN_DEGREE,
) -> ChebFun:
    """Adaptive Chebyshev interpolant of a vectorized function."""
    if tol < 1e-14:
        raise ValueError("tol must be at least 1e-14")
    a, b = float(interval[0]), float(interval[1])
    n = min_degree
    tail = np.inf
    while n <= max_degree:
        x = _map_pts(chebpts(n), a, b)
        v = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
        if not np.all(np.isfinite(v)):
            raise OverflowError("non-finite sample while interpolating")
        c = vals2coeffs(v)
        vs = np.max(np.abs(v))
        if vs == 0.0:
            return ChebFun([0.0], (a, b))
        m = max(4, (n + 1) // 8)
        tail = np.max(np.abs(c[-m:])) / vs
        if tail < tol:
            return ChebFun(_trim(c, tol, vs), (a, b), trim=False)
        n *= 2
    raise ConvergenceError(
        f"interpolation did not converge at degree {max_degree}; tail {tail:.3e}"
    )


def restrict(f: ChebFun, interval: Sequence[float]) -> ChebFun:
    """The same polynomial re-expanded on a subinterval."""
    a, b = float(interval[0]), float(interval[1])
    fa, fb = f.interval
    if a < fa - 1e-13 * max(1.0, abs(fa)) or b > fb + 1e-13 * max(1.0, abs(fb)) or not a < b:
        raise OutOfDomainError(f"[{a}, {b}] is not inside [{fa}, {fb}]")
    n = max(f.degree, 1)
    x = np.clip(_map_pts(chebpts(n), a, b), fa, fb)
    return ChebFun(_trim(vals2coeffs(f(x)), vscale=f.vscale), (a, b), trim=False)


def interpolate_interior(
    f: Callable[[np.ndarray], np.ndarray],
    interval: Sequence[float],
    tol: float = 1e-13,
    n: int = 32,
    max_degree: int = MAX_DEGREE,
) -> ChebFun:
    """Adaptive interpolant sampled at first-kind points only.

    The endpoints are never evaluated, so integrands with a removable
    singularity at an end of the interval are safe.  ``f`` may return a pair
    ``(values, scale)``; the tail is then judged against ``scale`` as well,
    which lets residuals that cancel down to roundoff converge.
    """
    a, b = float(interval[0]), float(interval[1])
    tail = np.inf
    n = max(int(n), 8)
    while True:
        n = min(n, max_degree + 1)
        x = a + (chebpts1(n) + 1.0) * (b - a) / 2.0
        out = f(x)
        extra = 0.0
        if isinstance(out, tuple):
            out, extra = out
        v = np.broadcast_to(np.asarray(out, dtype=float), x.shape)
        if not np.all(np.isfinite(v)):
            raise OverflowError("non-finite sample while interpolating")
        c = vals2coeffs1(v)
        vs = max(float(np.max(np.abs(v))), float(extra))
        if vs == 0.0:
            return ChebFun([0.0], (a, b))
        m = max(4, n // 16)
        tail = np.max(np.abs(c[-m:])) / vs
        if tail < tol:
            return ChebFun(_trim(c, tol, vs), (a, b), trim=False)
        if n > max_degree:
            raise ConvergenceError(
                f"interpolation did not converge at degree {max_degree}; tail {tail:.3e}"
            )
        n *= 2


def evaluate(f: ChebFun, x):
    """Value of ``f`` at ``x`` (scalar or array) by Clenshaw recurrence."""
    a, b = f.interval
    xa = np.asarray(x, dtype=float)
    slack = 1e-13 * max(1.0, abs(a), abs(b))
    if np.any(xa < a - slack) or np.any(xa > b + slack):
        raise OutOfDomainError(f"x outside [{a}, {b}]")
    t = np.clip(f._to_ref(xa), -1.0, 1.0)
    out = C.chebval(t, f.coeffs)
    return float(out) if np.ndim(out) == 0 else out


def differentiate(f: ChebFun) -> ChebFun:
    if f.degree == 0:
        return ChebFun([0.0], f.interval)
    c = C.chebder(f.coeffs) * (2.0 / f.length)
    return ChebFun(c, f.interval, vscale=f.vscale * 2.0 / f.length)


def integrate_cumulative(f: ChebFun) -> ChebFun:
    """Antiderivative that vanishes at the left endpoint."""
    c = C.chebint(f.coeffs, lbnd=-1) * (f.length / 2.0)
    return ChebFun(c, f.interval, vscale=f.vscale * f.length)


def integrate_definite(f: ChebFun) -> float:
    c = f.coeffs
    k = np.arange(0, len(c), 2)
    return float(np.sum(c[::2] * 2.0 / (1.0 - k * k)) * f.length / 2.0)


def combine(f: ChebFun, g: ChebFun, mode: str) -> ChebFun:
    """``add``, ``subtract`` or ``multiply`` two functions on one interval."""
    _check_same(f, g)
    if mode == "add":
        c = C.chebadd(f.coeffs, g.coeffs)
        return ChebFun(c, f.interval, vscale=max(f.vscale, g.vscale))
    if mode == "subtract":
        c = C.chebsub(f.coeffs, g.coeffs)
        return ChebFun(c, f.interval, vscale=max(f.vscale, g.vscale))
    if mode == "multiply":
        if f.degree == 0:
            return scale(g, f.coeffs[0])
        if g.degree == 0:
            return scale(f, g.coeffs[0])
        return ChebFun(_chebmul(f.coeffs, g.coeffs), f.interval, vscale=f.vscale * g.vscale)
    raise ValueError(f"unknown mode {mode!r}")


def _chebmul(a, b):
    # T_i T_j = (T_{i+j} + T_{|i-j|}) / 2, via aliasing-free value products
    n = len(a) + len(b) - 2
    if n < 64:
        return C.chebmul(a, b)
    ca = np.zeros(n + 1)
    cb = np.zeros(n + 1)
    ca[: len(a)] = a
    cb[: len(b)] = b
    return vals2coeffs(coeffs2vals(ca) * coeffs2vals(cb))


def scale(f: ChebFun, c: float) -> ChebFun:
    return ChebFun(f.coeffs * float(c), f.interval, trim=False)


def map(f: ChebFun, fn: Callable[[np.ndarray], np.ndarray], tol: float = 1e-13) -> ChebFun:
    """Adaptive interpolant of ``fn(f(x))``."""
    return interpolate(lambda x: fn(evaluate(f, x)), f.interval, tol=tol)


def l2_norm(f: ChebFun) -> float:
    return float(np.sqrt(max(integrate_definite(combine(f, f, "multiply")), 0.0)))


def sup_norm(f: ChebFun, n: int | None = None) -> float:
    """Max of |f| on a fine Chebyshev grid (at least 4x the degree)."""
    n = max(4 * f.degree, 256) if n is None else n
    return float(np.max(np.abs(f.values(n))))


def roots(f: ChebFun, max_degree: int = 256) -> np.ndarray:
    """Real roots of ``f`` inside its closed interval."""
    if f.degree == 0:
        return np.array([])
    c = f.coeffs
    if f.degree > max_degree:
        raise SingularLiftError("root search degree too high")
    r = C.chebroots(c)
    tol = 1e-8
    r = r[(np.abs(r.imag) < tol) & (r.real >= -1 - tol) & (r.real <= 1 + tol)].real
    a, b = f.interval
    return np.sort(a + (np.clip(r, -1.0, 1.0) + 1.0) * (b - a) / 2.0)


def divide(f: ChebFun, g: ChebFun, tol: float = 1e-13, what: str = "division") -> ChebFun:
    """``f / g``, cancelling zeros of ``g`` where ``f`` vanishes too.

    A zero of the denominator is accepted only when the numerator vanishes
    there as well; both factors are then deflated by ``(x - r)`` before the
    quotient is interpolated.
    """
    _check_same(f, g)
    if g.degree == 0:
        if g.coeffs[0] == 0.0:
            raise SingularLiftError(f"{what}: denominator vanishes")
        return scale(f, 1.0 / g.coeffs[0])
    gv = g.values(max(2 * g.degree, 32))
    gmax = np.max(np.abs(gv))
    if gmax == 0.0:
        raise SingularLiftError(f"{what}: denominator vanishes")
    fc, gc = f.coeffs, g.coeffs
    if np.all(gv > 1e-8 * gmax) or np.all(gv < -1e-8 * gmax):
        rts = np.array([])
    else:
        rts = roots(g)
    if rts.size:
        fscale = max(f.vscale, 1e-300)
        for r in _cluster(rts):
            t = float(g._to_ref(r))
            for _ in range(4):
                if abs(C.chebval(t, gc)) > 1e-9 * gmax:
                    break
                if abs(C.chebval(t, fc)) > 1e-8 * fscale:
                    raise SingularLiftError(f"{what}: denominator vanishes at x={r:.6g}")
                fc = C.chebdiv(fc, [-t, 1.0])[0] if len(fc) > 1 else np.zeros(1)
                gc = C.chebdiv(gc, [-t, 1.0])[0]
                if len(gc) == 1:
                    break
        f = ChebFun(fc, f.interval)
        g = ChebFun(gc, g.interval)
        if g.degree == 0:
            return scale(f, 1.0 / g.coeffs[0])
        gv = g.values(max(2 * g.degree, 32))
        if np.min(np.abs(gv)) < 1e-10 * np.max(np.abs(gv)):
            raise SingularLiftError(f"{what}: denominator vanishes")
    return interpolate(lambda x: evaluate(f, x) / evaluate(g, x), f.interval, tol=tol)


def _cluster(r, tol=1e-6):
    out = []
    for v in r:
        if not out or abs(v - out[-1]) > tol:
            out.append(v)
    return out
