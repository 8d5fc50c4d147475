import numpy as np
import pytest

from ghostode.funcspace import l2_norm
from ghostode.linsolve import BoundaryCondition, LinearParams
from ghostode.metrics import d1
from ghostode.problems import get_problem
from ghostode.recurrence import ODEProblem, expand, partial_sum, partial_sum_derivs


def test_lower_orders_are_unchanged_by_extension():
    pr = get_problem("bratu")
    p = LinearParams(0.4)
    e8 = expand(pr, p, 8)
    e7 = expand(pr, p, 7)
    for k in range(8):
        np.testing.assert_array_equal(e8.y[k].coeffs, e7.y[k].coeffs)


def test_extend_matches_fresh_expansion():
    pr = get_problem("example1")
    p = LinearParams(0.15)
    e = expand(pr, p, 3).extend(6)
    f = expand(pr, p, 6)
    for a, b in zip(e.y, f.y):
        np.testing.assert_array_equal(a.coeffs, b.coeffs)


@pytest.mark.parametrize("kind", ["bvp", "ivp"])
def test_linear_problem_is_exact_at_order_zero(kind):
    pr = get_problem("linear", a=-1.0, b=-2.0, c=1.0, kind=kind)
    e = expand(pr, LinearParams(1.0, -1.0, -2.0, 1.0), 4)
    for k in range(1, 5):
        assert l2_norm(e.y[k]) == 0.0 or l2_norm(e.y[k]) < 1e-14
    assert d1(pr, e.y[0]) < 1e-10
    x = np.linspace(0, 1, 21)
    np.testing.assert_allclose(e.y[0](x), pr.exact(x), atol=1e-12)


@pytest.mark.parametrize("name", ["bratu", "example1", "lane_emden_u"])
def test_corrections_carry_homogeneous_data(name):
    pr = get_problem(name)
    a, b = pr.interval
    e = expand(pr, LinearParams(0.5 * (b - a)), 5)
    for k in range(1, 6):
        y = e.y[k]
        assert abs(y(a)) < 1e-12
        other = y(b) if pr.kind == "bvp" else y.derivative()(a)
        assert abs(other) < 1e-12


def test_order_zero_carries_problem_data_and_p3():
    bc = BoundaryCondition("bvp", 0.0, 1.0, 1.0, 2.0)
    pr = ODEProblem("1", "y", bc)
    e = expand(pr, LinearParams(2.0, 0.0, 0.0, 4.0), 0)
    # 2 y'' + 4 = 0 -> y = -x^2 + 2 x + 1
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(e.y[0](x), -(x**2) + 2 * x + 1, atol=1e-14)


def test_second_derivative_from_equation_matches_differentiation():
    pr = get_problem("bratu")
    e = expand(pr, LinearParams(0.4, 0.3, -0.2, 0.1), 4)
    for k in range(5):
        np.testing.assert_allclose(e.d2y[k].coeffs[:5], e.y[k].derivative(2).coeffs[:5], atol=1e-10)


def test_partial_sum_epsilon():
    pr = get_problem("example1")
    e = expand(pr, LinearParams(0.15, epsilon=0.5), 3)
    x = np.linspace(0, 1, 7)
    ref = sum(0.5**k * e.y[k](x) for k in range(4))
    np.testing.assert_allclose(partial_sum(e, 3)(x), ref, atol=1e-14)
    np.testing.assert_allclose(partial_sum(e, 3, eps=0.0)(x), e.y[0](x))
    y, dy, _ = partial_sum_derivs(e, 3)
    np.testing.assert_allclose(dy(x), y.derivative()(x), atol=1e-11)
    with pytest.raises(ValueError):
        partial_sum(e, 4)


def test_undeclared_parameter_rejected():
    bc = BoundaryCondition("bvp", 0.0, 1.0, 0.0, 0.0)
    with pytest.raises(Exception):
        ODEProblem("1", "k*y", bc)


def test_example1_second_order_coefficient():
    e = expand(get_problem("example1", xi=0.1), LinearParams(0.2), 2)
    assert e.y[2](0.5) == pytest.approx(0.375 * 0.25 / (360 * 0.04), rel=1e-12)


def test_example1_first_partial_sum():
    e = expand(get_problem("example1", xi=0.1), LinearParams(0.2), 1)
    assert partial_sum(e, 1)(0.5) == pytest.approx(0.1875, rel=1e-13)
    x = np.linspace(0, 1, 9)
    np.testing.assert_allclose(e.y[1](x), -x * (1 - x) * (2 - x) / (6 * 0.2), atol=1e-14)


def test_bratu_second_order_coefficient():
    e = expand(get_problem("bratu"), LinearParams(0.5), 2)
    assert e.y[0].degree == 0 and e.y[0](0.3) == pytest.approx(1.0)
    ref = (np.e * 0.5 - 1) * 0.25 / (2 * np.e * 0.25)
    assert e.y[2](0.5) == pytest.approx(ref, rel=1e-12)


def test_lane_emden_taylor_coefficients():
    e = expand(get_problem("lane_emden_u", m=2, T=1.0), LinearParams(1.0), 3)
    y = partial_sum(e, 3)
    poly = np.polynomial.Chebyshev(y.coeffs, domain=y.interval).convert(kind=np.polynomial.Polynomial)
    np.testing.assert_allclose(poly.coef[:8], [0, 1, 0, -1 / 6, 0, 1 / 60, 0, -11 / 7560], atol=1e-14)
