import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghostode.exceptions import ResonanceError
from ghostode.funcspace import ChebFun, l2_norm
from ghostode.linsolve import (
    BoundaryCondition,
    LinearParams,
    characteristic_roots,
    solve_linear,
)

params = st.tuples(
    st.floats(0.2, 3.0),
    st.floats(-4.0, 4.0),
    st.floats(-6.0, 6.0),
)
forcing = st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=12)
kinds = st.sampled_from(["bvp", "ivp"])
data = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


def _residual(p, y, F):
    return p.p0 * y.derivative(2) + p.p1 * y.derivative() + p.p2 * y - F


def _check_bc(y, bc, tol=1e-12):
    a, b = bc.interval
    assert y(a) == pytest.approx(bc.value_left, abs=tol)
    if bc.kind == "bvp":
        assert y(b) == pytest.approx(bc.value_right, abs=tol)
    else:
        assert y.derivative()(a) == pytest.approx(bc.value_right, abs=tol)


@settings(max_examples=100, deadline=None)
@given(params, forcing, kinds, data, st.floats(0.5, 3.0))
def test_residual_and_boundary_data(pp, c, kind, vals, T):
    p = LinearParams(*pp)
    bc = BoundaryCondition(kind, 0.0, T, *vals)
    F = ChebFun(c, bc.interval)
    try:
        y = solve_linear(p, F, bc)
    except ResonanceError:
        return
    assert l2_norm(_residual(p, y, F)) < 1e-10 * (1 + l2_norm(F)) * max(1.0, y.vscale)
    _check_bc(y, bc, 1e-12 * max(1.0, y.vscale))


@pytest.mark.parametrize("kind", ["bvp", "ivp"])
@pytest.mark.parametrize("p0,p1", [(1.0, 2.0), (0.5, -3.0), (2.0, 0.0)])
def test_continuity_across_repeated_root(kind, p0, p1):
    bc = BoundaryCondition(kind, 0.0, 1.0, 0.3, -0.7)
    F = ChebFun([1.0, 0.5, -0.25], bc.interval)
    p2c = p1 * p1 / (4 * p0)
    sols = []
    for d in (-1e-8, 0.0, 1e-8):
        # discriminant p1^2 - 4 p0 p2 = d
        sols.append(solve_linear(LinearParams(p0, p1, p2c - d / (4 * p0)), F, bc))
    assert characteristic_roots(LinearParams(p0, p1, p2c)).kind in ("real-repeated", "double-integration")
    for s in (sols[0], sols[2]):
        assert l2_norm(s - sols[1]) < 1e-6


def test_root_classification():
    assert characteristic_roots(LinearParams(1.0)).kind == "double-integration"
    r = characteristic_roots(LinearParams(1.0, 0.0, -4.0))
    assert r.kind == "real-distinct" and r.w_plus == 2.0 and r.w_minus == -2.0
    r = characteristic_roots(LinearParams(1.0, 0.0, 4.0))
    assert r.kind == "complex-pair" and r.w_plus == pytest.approx(2j)


def test_known_solution_double_integration():
    # y'' = 1, y(0) = y(1) = 0 -> x(x-1)/2
    bc = BoundaryCondition("bvp", 0.0, 1.0, 0.0, 0.0)
    y = solve_linear(LinearParams(1.0), ChebFun([1.0], bc.interval), bc)
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(y(x), x * (x - 1) / 2, atol=1e-15)


def test_large_exponents_do_not_overflow():
    # |w| (b - a) = 400: naive exponentials would overflow
    bc = BoundaryCondition("bvp", 0.0, 1.0, 1.0, 2.0)
    p = LinearParams(1.0, 0.0, -(400.0**2))
    y = solve_linear(p, ChebFun([0.0], bc.interval), bc)
    assert np.isfinite(y.vscale)
    _check_bc(y, bc, 1e-10)
    assert abs(y(0.5)) < 1e-50 + 1e-12


def test_resonance_detected():
    bc = BoundaryCondition("bvp", 0.0, 1.0, 0.0, 0.0)
    with pytest.raises(ResonanceError):
        solve_linear(LinearParams(1.0, 0.0, np.pi**2), ChebFun([1.0], bc.interval), bc)


def test_p0_must_be_nonzero():
    with pytest.raises(ValueError):
        LinearParams(0.0)
