"""Truncated power series in epsilon whose coefficients are ChebFuns.

:class:`SeriesLifter` pushes an expression tree through the order-by-order
recurrences one coefficient at a time, so the expansion driver can append a
new order without recomputing the earlier ones.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .exceptions import SingularLiftError
from .funcspace import ChebFun, combine, divide, interpolate, scale


class EpsSeries:
    """``c_0 + c_1 eps + ... + c_n eps^n`` with ChebFun coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[ChebFun]):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("an EpsSeries needs at least one coefficient")
        iv = coeffs[0].interval
        if any(c.interval != iv for c in coeffs):
            raise ValueError("all coefficients must share one interval")
        self.coeffs = tuple(coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def interval(self):
        return self.coeffs[0].interval

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def truncate(self, n: int) -> "EpsSeries":
        return EpsSeries(self.coeffs[: n + 1])

    def __add__(self, other: "EpsSeries") -> "EpsSeries":
        n = min(self.order, other.order)
        return EpsSeries([self[k] + other[k] for k in range(n + 1)])

    def __sub__(self, other: "EpsSeries") -> "EpsSeries":
        n = min(self.order, other.order)
        return EpsSeries([self[k] - other[k] for k in range(n + 1)])

    def __mul__(self, other):
        if not isinstance(other, EpsSeries):
            return EpsSeries([scale(c, other) for c in self.coeffs])
        n = min(self.order, other.order)
        out = []
        for k in range(n + 1):
            acc = self[0] * other[k]
            for i in range(1, k + 1):
                acc = acc + self[i] * other[k - i]
            out.append(acc)
        return EpsSeries(out)

    __rmul__ = __mul__

    def derivative(self) -> "EpsSeries":
        """Termwise x-derivative."""
        return EpsSeries([c.derivative() for c in self.coeffs])

    def __repr__(self):
        return f"EpsSeries(order={self.order}, interval={self.interval})"


def eval_at_eps(s: EpsSeries, eps: float) -> ChebFun:
    """Sum of ``c_k eps^k`` (Horner)."""
    acc = s[s.order]
    for k in range(s.order - 1, -1, -1):
        acc = s[k] + scale(acc, eps)
    return acc


# -- incremental lifting ------------------------------------------------------

def _expand_pow(e: ex.ExprNode) -> ex.ExprNode:
    """Rewrite powers: integer exponents as multiplication trees, the rest
    as ``exp(q*log(base))``."""
    if e.kind in ("const", "param", "var"):
        return e
    args = tuple(_expand_pow(a) for a in e.args)
    if e.kind != "pow":
        return ex.ExprNode(e.kind, e.value, args)
    base, q = args
    if q.kind != "const":
        raise ValueError("exponents must be bound to constants before lifting")
    qv = q.value
    n = ex._int_exponent(qv)
    if n is None:
        return ex.ExprNode(
            "call", "exp", (ex.ExprNode("mul", None, (q, ex.ExprNode("call", "log", (base,)))),)
        )
    if n == 0:
        return ex.const(1.0)
    tree = _mul_tree(base, abs(n))
    if n < 0:
        return ex.ExprNode("div", None, (ex.const(1.0), tree))
    return tree


def _mul_tree(base, n):
    # binary exponentiation; equal subtrees share a cache slot
    if n == 1:
        return base
    half = _mul_tree(base, n // 2)
    sq = ex.ExprNode("mul", None, (half, half))
    return ex.ExprNode("mul", None, (sq, base)) if n % 2 else sq


def _madd(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return combine(a, b, "add")


def _mmul(a, b):
    if a is None or b is None:
        return None
    return combine(a, b, "multiply")


def _mscale(a, c):
    return None if a is None else scale(a, c)


class SeriesLifter:
    """Lifts one expression against a series that grows one order at a time.

    Coefficients that are identically zero are stored as ``None``.
    """

    def __init__(self, expr: ex.ExprNode, interval, params: Mapping[str, float] | None = None):
        self.source = expr
        self.interval = tuple(float(v) for v in interval)
        bound = ex.bind(expr, params or {})
        self.tree = _expand_pow(bound)
        self.order = -1
        self._y: list = []
        self._dy: list = []
        self._cache: dict = {}
        self._aux: dict = {}
        self._x = ChebFun.identity(self.interval)

    def coefficients(self) -> list[ChebFun]:
        zero = ChebFun([0.0], self.interval)
        return [zero if c is None else c for c in self._cache.get(self.tree, [])]

    def push(self, y_k: ChebFun | None, dy_k: ChebFun | None) -> ChebFun:
        """Append order ``k`` of the inputs; return order ``k`` of the expression."""
        self._y.append(y_k)
        self._dy.append(dy_k)
        self.order += 1
        out = self._coef(self.tree, self.order)
        return ChebFun([0.0], self.interval) if out is None else out

    def _coef(self, e, k):
        lst = self._cache.setdefault(e, [])
        while len(lst) <= k:
            lst.append(self._compute(e, len(lst)))
        return lst[k]

    def _compute(self, e, k):
        kind = e.kind
        if kind == "const":
            return ChebFun([e.value], self.interval) if k == 0 else None
        if kind == "var":
            if e.value == "x":
                return self._x if k == 0 else None
            return (self._y if e.value == "y" else self._dy)[k]
        if kind == "param":  # pragma: no cover - bound in __init__
            raise ValueError(f"unbound parameter {e.value}")
        if k > 0 and not self._depends(e):
            return None
        if kind == "neg":
            return _mscale(self._coef(e.args[0], k), -1.0)
        if kind in ("add", "sub"):
            a = self._coef(e.args[0], k)
            b = self._coef(e.args[1], k)
            return _madd(a, b if kind == "add" else _mscale(b, -1.0))
        if kind == "mul":
            a, b = e.args
            acc = None
            for i in range(k + 1):
                acc = _madd(acc, _mmul(self._coef(a, i), self._coef(b, k - i)))
            return acc
        if kind == "div":
            return self._div(e, k)
        if kind == "call":
            return self._call(e, k)
        raise ValueError(f"cannot lift node kind {kind!r}")  # pragma: no cover

    def _depends(self, e):
        d = self._aux.get(e)
        if d is None:
            d = self._aux[e] = bool(e.variables & {"y", "dy"})
        return d

    def _nonzero_den(self, e, b0):
        if b0 is None:
            raise SingularLiftError(f"division by zero in {ex.to_string(e)}")
        return b0

    def _div(self, e, k):
        a, b = e.args
        b0 = self._nonzero_den(e, self._coef(b, 0))
        num = self._coef(a, k)
        for i in range(1, k + 1):
            num = _madd(num, _mscale(_mmul(self._coef(b, i), self._coef(e, k - i)), -1.0))
        if num is None:
            return None
        return divide(num, b0, what=ex.to_string(e))

    def _call(self, e, k):
        name = e.value
        s = e.args[0]
        if k == 0:
            s0 = self._coef(s, 0)
            s0 = ChebFun([0.0], self.interval) if s0 is None else s0
            return self._outer(e, name, s0)
        if name == "exp":
            acc = None
            for j in range(1, k + 1):
                acc = _madd(acc, _mscale(_mmul(self._coef(s, j), self._coef(e, k - j)), j))
            return _mscale(acc, 1.0 / k)
        if name == "log":
            acc = self._coef(s, k)
            for j in range(1, k):
                acc = _madd(acc, _mscale(_mmul(self._coef(e, j), self._coef(s, k - j)), -j / k))
            if acc is None:
                return None
            return divide(acc, self._coef(s, 0), what=ex.to_string(e))
        if name == "sqrt":
            acc = self._coef(s, k)
            for j in range(1, k):
                acc = _madd(acc, _mscale(_mmul(self._coef(e, j), self._coef(e, k - j)), -1.0))
            if acc is None:
                return None
            return divide(acc, scale(self._coef(e, 0), 2.0), what=ex.to_string(e))
        # sin/cos and sinh/cosh are computed as coupled pairs
        partner = {"sin": "cos", "cos": "sin", "sinh": "cosh", "cosh": "sinh"}[name]
        other = ex.ExprNode("call", partner, (s,))
        sign = -1.0 if name == "cos" else 1.0
        acc = None
        for j in range(1, k + 1):
            acc = _madd(acc, _mscale(_mmul(self._coef(s, j), self._coef(other, k - j)), sign * j))
        return _mscale(acc, 1.0 / k)

    def _outer(self, e, name, s0):
        label = ex.to_string(e)
        if s0.degree == 0:
            v = ex._apply(name, s0.coeffs[0], e)
            return ChebFun([float(v)], self.interval)
        fn = getattr(np, name)
        if name in ("log", "sqrt"):
            grid = s0.values(max(4 * s0.degree, 64))
            lo = np.min(grid)
            if lo <= 0.0 if name == "log" else lo < 0.0:
                raise SingularLiftError(f"{name} argument not positive in {label}")
            if name == "sqrt" and lo == 0.0:
                raise SingularLiftError(f"sqrt argument vanishes in {label}")
        def f(x):
            v = s0(x)
            # a fully underflowed exponential carries no information either
            with np.errstate(over="raise", invalid="raise", under="raise"):
                return fn(v)

        try:
            return interpolate(f, self.interval)
        except FloatingPointError as err:
            raise OverflowError(f"{label}: {err}") from None


def lift(
    e: ex.ExprNode,
    y: EpsSeries,
    dy: EpsSeries,
    x: ChebFun | None = None,
    params: Mapping[str, float] | None = None,
) -> EpsSeries:
    """Epsilon series of ``e(x, y(eps), dy(eps))`` to the order of ``y``."""
    if y.order != dy.order or y.interval != dy.interval:
        raise ValueError("y and dy must share order and interval")
    interval = y.interval if x is None else x.interval
    lifter = SeriesLifter(e, interval, params)
    out = [lifter.push(y[k], dy[k]) for k in range(y.order + 1)]
    return EpsSeries(out)


def compose0(e: ex.ExprNode, y: ChebFun, dy: ChebFun, params: Mapping[str, float] | None = None) -> ChebFun:
    """``e(x, y(x), dy(x))`` as a ChebFun (order-0 lift)."""
    lifter = SeriesLifter(e, y.interval, params)
    return lifter.push(y, dy)
