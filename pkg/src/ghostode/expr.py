"""Scalar expressions for the ``g(x, y, y')`` and ``h(x, y, y')`` terms.

Grammar (whitespace-insensitive)::

    expr   := term { ("+" | "-") term }
    term   := factor { ("*" | "/") factor }
    factor := ["-"] power
    power  := atom ["^" atom]
    atom   := number | ident | ident "(" expr {"," expr} ")" | "(" expr ")"

``x``, ``y`` and ``dy`` are the independent variable, the unknown and its
derivative.  Any other identifier is a named parameter bound at evaluation
time.  Exponents must not depend on ``x``, ``y`` or ``dy``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .exceptions import (
    ArityError,
    ExprDomainError,
    ExprSyntaxError,
    UnknownIdentifierError,
)

VARIABLES = ("x", "y", "dy")
FUNCTIONS = {
    "exp": 1,
    "log": 1,
    "sin": 1,
    "cos": 1,
    "sinh": 1,
    "cosh": 1,
    "sqrt": 1,
    "pow": 2,
}
RESERVED = frozenset(VARIABLES) | frozenset(FUNCTIONS)


@dataclass(frozen=True)
class ExprNode:
    """Immutable expression tree node.

    ``kind`` is one of ``const``, ``param``, ``var``, ``neg``, ``add``,
    ``sub``, ``mul``, ``div``, ``pow`` or ``call``.  ``value`` holds the
    number, the parameter/variable name or the function name.
    """

    kind: str
    value: object = None
    args: tuple = ()

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"ExprNode({to_string(self)!r})"

    @property
    def variables(self) -> frozenset:
        if self.kind == "var":
            return frozenset([self.value])
        out = frozenset()
        for a in self.args:
            out |= a.variables
        return out

    @property
    def parameters(self) -> frozenset:
        if self.kind == "param":
            return frozenset([self.value])
        out = frozenset()
        for a in self.args:
            out |= a.parameters
        return out


def const(v) -> ExprNode:
    return ExprNode("const", float(v))


def var(name) -> ExprNode:
    return ExprNode("var", name)


def param(name) -> ExprNode:
    return ExprNode("param", name)


def _is_const(e, v=None):
    return e.kind == "const" and (v is None or e.value == v)


def neg(a):
    if _is_const(a):
        return const(-a.value)
    if a.kind == "neg":
        return a.args[0]
    return ExprNode("neg", None, (a,))


def add(a, b):
    if _is_const(a) and _is_const(b):
        return const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return ExprNode("add", None, (a, b))


def sub(a, b):
    if _is_const(a) and _is_const(b):
        return const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return ExprNode("sub", None, (a, b))


def mul(a, b):
    if _is_const(a) and _is_const(b):
        return const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return ExprNode("mul", None, (a, b))


def div(a, b):
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return const(a.value / b.value)
    if _is_const(a, 0.0):
        return const(0.0)
    if _is_const(b, 1.0):
        return a
    return ExprNode("div", None, (a, b))


def power(a, b):
    if _is_const(b, 0.0):
        return const(1.0)
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return const(_pow_scalar(a.value, b.value, a))
    return ExprNode("pow", None, (a, b))


def call(name, arg):
    if _is_const(arg):
        return const(_apply(name, arg.value, ExprNode("call", name, (arg,))))
    return ExprNode("call", name, (arg,))


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            rest = src[pos:]
            if rest.strip() == "":
                break
            off = pos + (len(rest) - len(rest.lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[off]!r}", len(src[:off].encode()))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(src[:start].encode())))
        pos = m.end()
    tokens.append(("end", "", len(src.encode())))
    return tokens


class _Parser:
    def __init__(self, src, params):
        self.toks = _tokenize(src)
        self.i = 0
        self.params = None if params is None else frozenset(params)

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(f"expected {value!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = ExprNode("add" if op == "+" else "sub", None, (node, rhs))
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.factor()
            node = ExprNode("mul" if op == "*" else "div", None, (node, rhs))
        return node

    def factor(self):
        if self.peek()[1] == "-":
            self.take()
            return ExprNode("neg", None, (self.power(),))
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            tok = self.take()
            expo = self.atom()
            _check_exponent(expo, tok[2])
            return ExprNode("pow", None, (base, expo))
        return base

    def atom(self):
        kind, text, off = self.take()
        if kind == "num":
            return ExprNode("const", float(text))
        if kind == "ident":
            if self.peek()[1] == "(":
                return self.call(text, off)
            if text in VARIABLES:
                return ExprNode("var", text)
            if text in FUNCTIONS:
                raise ExprSyntaxError(f"function {text!r} used without arguments", off)
            if self.params is not None and text not in self.params:
                raise UnknownIdentifierError(f"unknown identifier {text!r}", off)
            return ExprNode("param", text)
        if text == "(":
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {what}", off)

    def call(self, name, off):
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(f"unknown function {name!r}", off)
        self.take("(")
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.expr())
        self.take(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", off
            )
        if name == "pow":
            _check_exponent(args[1], off)
            return ExprNode("pow", None, tuple(args))
        return ExprNode("call", name, (args[0],))


def _check_exponent(expo, off):
    if expo.variables:
        raise ExprSyntaxError("exponent must not depend on x, y or dy", off)


def parse(source: str, params: Iterable[str] | None = None) -> ExprNode:
    """Parse ``source`` into an :class:`ExprNode`.

    If ``params`` is given, identifiers outside it are rejected.
    """
    return _Parser(source, params).parse()


# -- printing --------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYM = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def to_string(e: ExprNode) -> str:
    k = e.kind
    if k == "const":
        v = e.value
        text = repr(v) if math.isfinite(v) else f"({v})"
        return f"({text})" if v < 0 or text.startswith("-") else text
    if k in ("param", "var"):
        return e.value
    if k == "call":
        return f"{e.value}({to_string(e.args[0])})"
    if k == "neg":
        return f"-{_wrap(e.args[0], 4)}"
    if k == "pow":
        return f"{_wrap(e.args[0], 5)}^{_wrap(e.args[1], 5)}"
    a, b = e.args
    p = _PREC[k]
    return f"{_wrap(a, p)}{_SYM[k]}{_wrap(b, p + 1)}"


def _wrap(e, min_prec):
    s = to_string(e)
    if e.kind in _PREC and _PREC[e.kind] < min_prec:
        return f"({s})"
    return s


# -- evaluation ------------------------------------------------------------

def _int_exponent(q):
    if float(q).is_integer() and abs(q) <= 64:
        return int(q)
    return None


def _ipow(base, n):
    """Binary exponentiation; keeps integer powers exact for series lifting."""
    if n < 0:
        return 1.0 / _ipow(base, -n)
    result = None
    acc = base
    while n:
        if n & 1:
            result = acc if result is None else result * acc
        n >>= 1
        if n:
            acc = acc * acc
    return 1.0 if result is None else result


def _pow_scalar(base, q, node):
    n = _int_exponent(q)
    if n is not None:
        if n < 0 and np.any(np.asarray(base) == 0):
            raise ExprDomainError(f"division by zero in {to_string(node)}")
        return _ipow(base, n)
    if np.any(np.asarray(base) <= 0):
        raise ExprDomainError(
            f"non-integer power of non-positive base in {to_string(node)}"
        )
    return np.power(base, q)


def _apply(name, v, node):
    arr = np.asarray(v)
    if name == "log" and np.any(arr <= 0):
        raise ExprDomainError(f"log of non-positive value in {to_string(node)}")
    if name == "sqrt" and np.any(arr < 0):
        raise ExprDomainError(f"sqrt of negative value in {to_string(node)}")
    with np.errstate(over="ignore"):
        return getattr(np, name)(v)


def eval_scalar(
    expr: ExprNode,
    x,
    y,
    dy,
    params: Mapping[str, float] | None = None,
):
    """Evaluate ``expr`` in IEEE double arithmetic.

    Arguments may be floats or equally-shaped numpy arrays.
    """
    env = {"x": x, "y": y, "dy": dy}
    params = params or {}
    return _eval(expr, env, params)


def _eval(e, env, params):
    k = e.kind
    if k == "const":
        return e.value
    if k == "var":
        return env[e.value]
    if k == "param":
        try:
            return float(params[e.value])
        except KeyError:
            raise ExprDomainError(f"parameter {e.value!r} is not bound") from None
    if k == "neg":
        return -_eval(e.args[0], env, params)
    if k == "call":
        return _apply(e.value, _eval(e.args[0], env, params), e)
    if k == "pow":
        q = _eval(e.args[1], env, params)
        return _pow_scalar(_eval(e.args[0], env, params), float(q), e)
    a = _eval(e.args[0], env, params)
    b = _eval(e.args[1], env, params)
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if np.any(np.asarray(b) == 0):
        raise ExprDomainError(f"division by zero in {to_string(e)}")
    return a / b


def bind(expr: ExprNode, params: Mapping[str, float]) -> ExprNode:
    """Substitute parameter values, folding constants."""
    k = expr.kind
    if k == "param":
        if expr.value not in params:
            raise ExprDomainError(f"parameter {expr.value!r} is not bound")
        return const(params[expr.value])
    if k in ("const", "var"):
        return expr
    args = [bind(a, params) for a in expr.args]
    if k == "neg":
        return neg(args[0])
    if k == "call":
        return call(expr.value, args[0])
    return _BUILD[k](*args)


_BUILD = {"add": add, "sub": sub, "mul": mul, "div": div, "pow": power}


# -- symbolic differentiation ----------------------------------------------

def differentiate(expr: ExprNode, wrt: str) -> ExprNode:
    """Exact partial derivative with respect to ``x``, ``y`` or ``dy``."""
    if wrt not in VARIABLES:
        raise ValueError(f"cannot differentiate with respect to {wrt!r}")
    return _d(expr, wrt)


def _d(e, v):
    k = e.kind
    if k in ("const", "param"):
        return const(0.0)
    if k == "var":
        return const(1.0 if e.value == v else 0.0)
    if v not in e.variables:
        return const(0.0)
    if k == "neg":
        return neg(_d(e.args[0], v))
    if k == "add":
        return add(_d(e.args[0], v), _d(e.args[1], v))
    if k == "sub":
        return sub(_d(e.args[0], v), _d(e.args[1], v))
    if k == "mul":
        a, b = e.args
        return add(mul(_d(a, v), b), mul(a, _d(b, v)))
    if k == "div":
        a, b = e.args
        return div(sub(mul(_d(a, v), b), mul(a, _d(b, v))), power(b, const(2.0)))
    if k == "pow":
        a, q = e.args
        return mul(mul(q, power(a, sub(q, const(1.0)))), _d(a, v))
    a = e.args[0]
    da = _d(a, v)
    name = e.value
    if name == "exp":
        outer = call("exp", a)
    elif name == "log":
        return div(da, a)
    elif name == "sin":
        outer = call("cos", a)
    elif name == "cos":
        outer = neg(call("sin", a))
    elif name == "sinh":
        outer = call("cosh", a)
    elif name == "cosh":
        outer = call("sinh", a)
    elif name == "sqrt":
        return div(da, mul(const(2.0), call("sqrt", a)))
    else:  # pragma: no cover - grammar guarantees the list above
        raise ValueError(name)
    return mul(outer, da)
