import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambert3b.errors import DomainError
from lambert3b.lambert_w import BRANCH_POINT, Branch, lambertw, lambertw_negexp, w_derivative, w_eval

from oracles import bisect_lambertw


def _tol(x):
    return 1e-12 * max(1.0, abs(x))


@pytest.mark.parametrize(
    "x, branch, expected",
    [
        (0.0, 0, 0.0),
        (math.e, 0, 1.0),
        (-math.log(2) / 2, 0, -math.log(2)),
        (-math.log(2) / 2, -1, -2 * math.log(2)),
        (2 * math.exp(2), 0, 2.0),
        (-3 * math.exp(-3), -1, -3.0),
    ],
)
def test_exact_values(x, branch, expected):
    assert w_eval(branch, x).value == pytest.approx(expected, rel=1e-14, abs=1e-15)


def test_omega_constant_against_bisection():
    assert abs(w_eval(0, 1.0).value - bisect_lambertw(1.0)) <= 1e-12
    assert w_eval(0, 1.0).value == pytest.approx(0.567143290409784, abs=1e-12)


@pytest.mark.parametrize("branch", [0, -1])
def test_branch_point_snaps_to_minus_one(branch):
    assert w_eval(branch, BRANCH_POINT).value == -1.0
    assert w_eval(branch, BRANCH_POINT + 5e-13).value == -1.0


@pytest.mark.parametrize("branch, x", [(0, -1.0), (-1, -1.0), (-1, 0.0), (-1, 0.5), (0, math.nan), (0, math.inf)])
def test_domain_errors(branch, x):
    with pytest.raises(DomainError):
        w_eval(branch, x)


def test_branch_coercion():
    assert Branch.coerce("lower") is Branch.LOWER
    assert Branch.coerce("-1") is Branch.LOWER
    assert Branch.coerce(0) is Branch.PRINCIPAL
    with pytest.raises(ValueError):
        Branch.coerce("upper")


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=BRANCH_POINT, max_value=1e300))
def test_principal_round_trip(x):
    w = w_eval(0, x).value
    assert w >= -1.0
    assert abs(w * math.exp(w) - x) <= _tol(x)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=BRANCH_POINT, max_value=-1e-300))
def test_lower_round_trip(x):
    w = w_eval(-1, x).value
    assert w <= -1.0
    assert abs(w * math.exp(w) - x) <= _tol(x)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-0.36, max_value=50.0), st.sampled_from([0, -1]))
def test_matches_bisection_where_well_conditioned(x, branch):
    if branch == -1 and x >= -1e-12:
        return
    w = w_eval(branch, x).value
    assert w == pytest.approx(bisect_lambertw(x, branch), rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("x, branch", [(0.5, 0), (-0.2, 0), (-0.2, -1), (30.0, 0), (-1e-5, -1)])
def test_derivative_matches_central_difference(x, branch):
    h = 1e-6 * max(abs(x), 1e-3)
    fd = (w_eval(branch, x + h).value - w_eval(branch, x - h).value) / (2 * h)
    assert w_derivative(branch, x) == pytest.approx(fd, rel=1e-7)


def test_derivative_at_zero_and_branch_point():
    assert w_derivative(0, 0.0) == 1.0
    with pytest.raises(DomainError):
        w_derivative(0, BRANCH_POINT)


@pytest.mark.parametrize("s", [-1.5, -3.0, -40.0, -700.0])
@pytest.mark.parametrize("branch", [0, -1])
def test_negexp_agrees_with_direct(s, branch):
    assert lambertw_negexp(s, branch) == pytest.approx(w_eval(branch, -math.exp(s)).value, rel=1e-13, abs=1e-300)


def test_negexp_survives_underflow():
    # -exp(-1e4) underflows to -0.0, yet W-1 is about -1e4 - ln(1e4)
    s = -1e4
    w = lambertw_negexp(s, -1)
    assert w + math.log(-w) == pytest.approx(s, rel=1e-14)
    assert lambertw_negexp(s, 0) == 0.0
    with pytest.raises(DomainError):
        lambertw_negexp(-0.5, 0)


def test_array_wrapper():
    x = np.array([[0.0, 1.0], [math.e, 10.0]])
    out = lambertw(x)
    assert out.shape == x.shape
    np.testing.assert_allclose(out * np.exp(out), x, rtol=1e-14, atol=1e-15)
    assert isinstance(lambertw(1.0), float)
