import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from abel.bounds import (BoundParams, comparison_F, comparison_H, growth_integral,
                         regularity_radius, safe_disk_radius_at_origin, singularity_scale,
                         solution_majorant)
from abel.continuation import integrate_along_path
from abel.core import line, make_equation
from abel.errors import DomainError


def _S_quad(a, K, m, t):
    val, _ = quad(lambda s: max(1.0, a + s) ** m, 0.0, t, points=[max(0.0, 1.0 - a)], limit=200)
    return K * val


@pytest.mark.parametrize("a,K,m,t", [(0.0, 1.0, 0, 2.0), (0.3, 2.0, 3, 1.5), (2.0, 0.5, 2, 0.7),
                                     (0.9, 1.0, 5, 0.05)])
def test_growth_integral_matches_quadrature(a, K, m, t):
    assert growth_integral(a, K, m, t) == pytest.approx(_S_quad(a, K, m, t), rel=1e-10)


def test_comparison_bracket_on_log_grid():
    for y in np.logspace(-6, 6, 241):
        F = comparison_F(y)
        assert -1.0 / (2 * y * y) < F < comparison_H(y)


def test_H_continuous_at_one():
    assert comparison_H(1.0) == pytest.approx(comparison_H(1.0 - 1e-12), abs=1e-11)


def test_regularity_radius_known_value():
    # |a| = 1, |y_a| = 1, K = 1, m = 1:  (1 + rho)**2 - 1 = 2 * 1/4
    assert regularity_radius(BoundParams(1.0, 1.0, 1.0, 1)) == pytest.approx(math.sqrt(1.5) - 1, rel=1e-14)


@given(st.floats(0, 3), st.floats(1e-4, 1e3), st.floats(0.1, 5), st.integers(0, 6))
@settings(max_examples=80, deadline=None)
def test_regularity_radius_solves_budget_equation(a, ya, K, m):
    params = BoundParams(a, ya, K, m)
    rho = regularity_radius(params)
    target = -comparison_H(ya)
    hi = 1.0
    while _S_quad(a, K, m, hi) < target:
        hi *= 2.0
    oracle = brentq(lambda t: _S_quad(a, K, m, t) - target, 0.0, hi, xtol=1e-14, rtol=1e-12)
    assert rho == pytest.approx(oracle, rel=1e-8)
    assert solution_majorant(params, 0.999 * rho) < math.inf
    assert solution_majorant(params, 1.001 * rho) == math.inf


@given(st.floats(0, 2), st.floats(1e-3, 10), st.floats(0.1, 3), st.integers(0, 4))
@settings(max_examples=40, deadline=None)
def test_majorant_starts_above_initial_value_and_increases(a, ya, K, m):
    params = BoundParams(a, ya, K, m)
    rho = regularity_radius(params)
    ts = np.linspace(0, 0.99 * rho, 20)
    vals = [solution_majorant(params, t) for t in ts]
    assert vals[0] >= ya
    assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))


def test_majorant_dominates_worst_case_real_solution():
    # y' = y**2 + y**3 with y real positive is the extremal equation for K = 1, m = 0
    eq = make_equation([1.0], [1.0])
    params = BoundParams(0.0, 0.5, 1.0, 0)
    rho = regularity_radius(params)
    for t in np.linspace(0.05, 0.99 * rho, 6):
        res = integrate_along_path(eq, 0.5, line(0, t))
        assert res.reached
        assert abs(res.final_value) <= solution_majorant(params, t) * (1 + 1e-9)


def test_zero_initial_value():
    params = BoundParams(0.5, 0.0, 1.0, 2)
    assert regularity_radius(params) == math.inf
    assert solution_majorant(params, 10.0) == 0.0


def test_domain_errors():
    with pytest.raises(DomainError):
        BoundParams(-1.0, 1.0, 1.0, 1)
    with pytest.raises(DomainError):
        BoundParams(1.0, 1.0, 0.0, 1)
    with pytest.raises(DomainError):
        BoundParams(1.0, 1.0, 1.0, -1)
    with pytest.raises(DomainError):
        comparison_F(0.0)


@given(st.floats(1e-6, 1e2), st.floats(0.1, 5), st.integers(0, 5))
@settings(max_examples=60, deadline=None)
def test_safe_disk_contains_itself_in_every_regularity_disk(ya, K, m):
    R = safe_disk_radius_at_origin(ya, K, m)
    assert R > 0
    for frac in (0.0, 0.25, 0.5):
        rho = regularity_radius(BoundParams(frac * R, ya, K, m))
        assert rho >= R + frac * R - 1e-12 * R


def test_safe_disk_shrinks_with_initial_value():
    radii = [safe_disk_radius_at_origin(y, 1.0, 2) for y in (1e-4, 1e-2, 1.0, 1e2)]
    assert all(r1 > r2 for r1, r2 in zip(radii, radii[1:]))


def test_singularity_scale_positive():
    eq = make_equation([1.0], [0.0, 2.0])
    sc = singularity_scale(eq, 1.0)
    assert sc.eta == 2.0 and sc.r > 0 and sc.M > 0
    with pytest.raises(DomainError):
        singularity_scale(eq, 0.0)
