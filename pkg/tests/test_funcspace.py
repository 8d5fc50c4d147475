import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as C

from ghostode import funcspace as fs
from ghostode.exceptions import (
    ConvergenceError,
    IntervalMismatchError,
    OutOfDomainError,
    SingularLiftError,
)
from ghostode.funcspace import ChebFun

coeff_lists = st.lists(st.floats(-1, 1, allow_nan=False), min_size=2, max_size=31)
intervals = st.tuples(st.floats(-3, 1), st.floats(0.5, 4)).map(lambda t: (t[0], t[0] + t[1]))


def _rel_l2(f, g):
    return fs.l2_norm(f - g) / max(fs.l2_norm(g), 1e-300)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, intervals)
def test_derivative_inverts_cumsum(c, iv):
    f = ChebFun(c, iv)
    if fs.l2_norm(f) < 1e-6:
        return
    g = fs.differentiate(fs.integrate_cumulative(f))
    assert _rel_l2(g, f) <= 1e-11


@settings(max_examples=60, deadline=None)
@given(coeff_lists, intervals)
def test_definite_integral_matches_cumulative(c, iv):
    f = ChebFun(c, iv)
    F = fs.integrate_cumulative(f)
    I = fs.integrate_definite(f)
    assert F(iv[0]) == pytest.approx(0.0, abs=1e-14 * max(1, abs(I)))
    assert I == pytest.approx(float(F(iv[1])), rel=1e-12, abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(coeff_lists, coeff_lists, intervals, st.integers(0, 2**31 - 1))
def test_combine_and_map_match_pointwise(c1, c2, iv, seed):
    f, g = ChebFun(c1, iv), ChebFun(c2, iv)
    x = np.random.default_rng(seed).uniform(*iv, 50)
    fx, gx = f(x), g(x)
    scale = 1 + np.max(np.abs(fx)) * (1 + np.max(np.abs(gx)))
    np.testing.assert_allclose(fs.combine(f, g, "add")(x), fx + gx, atol=1e-11 * scale)
    np.testing.assert_allclose(fs.combine(f, g, "multiply")(x), fx * gx, atol=1e-11 * scale)
    m = fs.map(f, np.sin)
    np.testing.assert_allclose(m(x), np.sin(fx), atol=1e-11 * scale)


def test_interpolate_smooth_function():
    f = fs.interpolate(np.exp, (0.0, 2.0))
    x = np.linspace(0, 2, 101)
    np.testing.assert_allclose(f(x), np.exp(x), atol=1e-13 * np.exp(2))
    assert f.sum() == pytest.approx(np.exp(2) - 1, rel=1e-14)


def test_interpolate_polynomial_is_exact_degree():
    f = fs.interpolate(lambda x: 1 - 3 * x + x**3, (-1, 2))
    assert f.degree == 3


def test_interpolate_fails_fast_on_singularity():
    with pytest.raises(ConvergenceError):
        fs.interpolate(lambda x: np.abs(x) ** 0.5, (-1, 1), max_degree=256)


def test_interval_mismatch():
    with pytest.raises(IntervalMismatchError):
        ChebFun([1.0], (0, 1)) + ChebFun([1.0], (0, 2))


def test_evaluate_out_of_domain():
    with pytest.raises(OutOfDomainError):
        fs.evaluate(ChebFun([1.0, 1.0], (0, 1)), 1.5)


def test_roots():
    f = fs.interpolate(lambda x: np.cos(np.pi * x), (0, 2))
    np.testing.assert_allclose(fs.roots(f), [0.5, 1.5], atol=1e-12)


def test_divide_cancels_removable_zero():
    x = ChebFun.identity((0.0, 1.0))
    f = fs.interpolate(np.sin, (0.0, 1.0))
    q = fs.divide(f, x)
    t = np.linspace(1e-3, 1, 50)
    np.testing.assert_allclose(q(t), np.sin(t) / t, atol=1e-11)
    assert q(0.0) == pytest.approx(1.0, abs=1e-11)


def test_divide_rejects_pole():
    x = ChebFun.identity((0.0, 1.0))
    with pytest.raises(SingularLiftError):
        fs.divide(ChebFun([1.0], (0.0, 1.0)), x)


def test_restrict_keeps_the_polynomial():
    f = ChebFun([0.3, -1.0, 0.5, 0.25], (0, 4))
    g = fs.restrict(f, (1, 3))
    x = np.linspace(1, 3, 17)
    np.testing.assert_allclose(g(x), f(x), atol=1e-14)
    assert g.degree == f.degree
    with pytest.raises(OutOfDomainError):
        fs.restrict(f, (3, 5))


def test_json_round_trip_is_lossless():
    f = fs.interpolate(np.cos, (0.0, 3.0))
    g = ChebFun.from_json(json.loads(json.dumps(f.to_json())))
    assert g.interval == f.interval
    np.testing.assert_array_equal(g.coeffs, f.coeffs)


def test_norms():
    f = ChebFun.identity((0.0, 1.0))
    assert fs.l2_norm(f) == pytest.approx(np.sqrt(1 / 3), rel=1e-15)
    assert fs.sup_norm(1.0 - f) == pytest.approx(1.0)


def test_chebyshev_points_and_transform():
    n = 16
    c = np.random.default_rng(0).normal(size=n + 1)
    v = fs.coeffs2vals(c)
    np.testing.assert_allclose(v, C.chebval(fs.chebpts(n), c), atol=1e-13)
    np.testing.assert_allclose(fs.vals2coeffs(v), c, atol=1e-13)
