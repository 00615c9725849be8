import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abel.continuation import (Chart, Status, ToleranceOptions, integrate_along_path,
                               locate_movable_singularity, singular_solution_puiseux,
                               singularities_near_path, singularity_sensitivity)
from abel.core import circle, line, make_equation, polyline
from abel.errors import DenominatorVanished, DomainError


def exact_cubic(y0, x):
    """Principal-branch value of (y0**-2 - 2x)**-1/2, valid near the real start."""
    return (y0 ** -2 - 2 * x) ** -0.5


def test_options_defaults_and_validation():
    o = ToleranceOptions()
    assert o.rel_tol == 1e-10 and o.chart_switch_threshold == 1e4
    assert o.min_locate_magnitude == 1e3 and o.min_clearance == 0.02
    assert o.with_overrides(rel_tol=1e-8).rel_tol == 1e-8
    assert o.with_overrides(rel_tol=None).rel_tol == 1e-10
    with pytest.raises((DomainError, ValueError)):
        ToleranceOptions(rel_tol=-1.0)


def test_straight_path_matches_closed_form(cubic_eq):
    res = integrate_along_path(cubic_eq, 1.0, line(0, 0.4))
    assert res.status is Status.REACHED
    assert res.final_value == pytest.approx(exact_cubic(1.0, 0.4), rel=1e-9)


def test_path_around_singularity_picks_continued_branch(cubic_eq):
    # below x0 the quantity 1 - 2x turns counter-clockwise from 1 to -1, giving -i
    res = integrate_along_path(cubic_eq, 1.0, polyline([0, 0.5 - 0.5j, 1]))
    assert res.reached
    assert res.final_value == pytest.approx(-1j, rel=1e-9)
    res = integrate_along_path(cubic_eq, 1.0, polyline([0, 0.5 + 0.5j, 1]))
    assert res.final_value == pytest.approx(1j, rel=1e-9)


def test_loop_twice_restores_value(cubic_eq):
    loop = circle(0.5, 0.0, 1)
    once = integrate_along_path(cubic_eq, 1.0, loop)
    twice = integrate_along_path(cubic_eq, 1.0, circle(0.5, 0.0, 2))
    assert once.final_value == pytest.approx(-1.0, rel=1e-9)
    assert twice.final_value == pytest.approx(1.0, rel=1e-9)


def test_chart_switch_near_blow_up():
    # y' = 1e-6 y**3, y(0) = 1e3: y = 1e3 (1 - 2x)**-1/2 exceeds 1e4 well before x0 = 1/2
    eq = make_equation([0.0], [1e-6])
    x_end = 0.5 - 1e-4
    res = integrate_along_path(eq, 1e3, line(0, x_end))
    assert res.reached
    assert res.chart_switches and res.samples[-1].chart is Chart.U
    exact = 1e3 * (1 - 2 * x_end) ** -0.5
    # the problem amplifies local errors by about (y / y0)**2 = 5e3 here
    assert res.final_value == pytest.approx(exact, rel=1e-6)
    tight = integrate_along_path(eq, 1e3, line(0, x_end), ToleranceOptions(rel_tol=1e-12))
    assert abs(tight.final_value - exact) < 0.1 * abs(res.final_value - exact)


def test_variational_derivative(cubic_eq):
    y0 = 0.8 + 0.3j
    res = integrate_along_path(cubic_eq, y0, line(0, 0.3 + 0.1j), variational=True)
    y = res.final_value
    assert y == pytest.approx(exact_cubic(y0, 0.3 + 0.1j), rel=1e-9)
    assert res.final_derivative == pytest.approx((y / y0) ** 3, rel=1e-8)


def test_hit_movable(cubic_eq):
    res = integrate_along_path(cubic_eq, 1.0, line(0, 1))
    assert res.status is Status.HIT_MOVABLE
    rec = res.singularity
    assert rec.kind == "movable" and rec.ramification_order == 2
    assert rec.location == pytest.approx(0.5, abs=1e-9)
    assert rec.leading_coefficient == pytest.approx(-0.5, rel=1e-6)
    assert res.final_value is None


def test_hit_fixed():
    # y' = (x - 1/2) y**3 with y(0) = 2i is i/(x - 1/2): a pole on the root of q
    eq = make_equation([0.0], [-0.5, 1.0])
    res = integrate_along_path(eq, 2j, line(0, 1))
    assert res.status is Status.HIT_FIXED
    assert res.fixed_point == pytest.approx(0.5, abs=1e-9)


def test_zero_solution_short_circuit(cubic_eq):
    res = integrate_along_path(cubic_eq, 0.0, line(0, 10))
    assert res.reached and res.final_value == 0


def test_continuity_required_at_start(cubic_eq):
    res = integrate_along_path(cubic_eq, 1.0, line(0, 0.1))
    assert res.samples[0].x == 0 and res.samples[0].value == 1.0


@given(st.floats(0.2, 3.0), st.floats(-math.pi, math.pi))
@settings(max_examples=25, deadline=None)
def test_locate_matches_closed_form(mag, arg):
    eq = make_equation([0.0], [0.0, 1.0])  # y**-2 = y_c**-2 + c**2 - x**2
    c = 0.5
    y_c = mag * 50 * cmath.exp(1j * arg)
    x0_sq = y_c ** -2 + c * c
    rec = locate_movable_singularity(eq, c, y_c)
    candidates = [cmath.sqrt(x0_sq), -cmath.sqrt(x0_sq)]
    assert min(abs(rec.location - z) for z in candidates) <= 1e-10
    assert rec.leading_coefficient == pytest.approx(-1 / (2 * rec.location), rel=1e-8)


def test_locate_errors(cubic_eq):
    with pytest.raises(DomainError):
        locate_movable_singularity(cubic_eq, 0.0, 0.0)
    eq = make_equation([0.0], [-0.5, 1.0])
    with pytest.raises(DenominatorVanished):
        # the pole of i/(x - 1/2) is on the fixed singularity
        locate_movable_singularity(eq, 0.5 - 1e-4, 1j / -1e-4)


def test_puiseux_cubic_exact():
    eq = make_equation([0.0], [1.0])
    s = singular_solution_puiseux(eq, 0.5, 5)
    assert s.denominator == 2 and str(s.leading_exponent) == "-1/2"
    assert s.coefficients[0] ** 2 == pytest.approx(-0.5, rel=1e-12)
    assert np.abs(s.coefficients[1:]).max() <= 1e-12


def test_puiseux_linear_q_binomial_oracle():
    eq = make_equation([0.0], [0.0, 1.0])
    x0 = 1.3 - 0.2j
    s = singular_solution_puiseux(eq, x0, 6)
    c0 = s.coefficients[0]
    assert c0 ** 2 == pytest.approx(-1 / (2 * x0), rel=1e-12)
    expected = [c0, 0, -c0 / (4 * x0), 0, 3 * c0 / (32 * x0 ** 2), 0]
    assert s.coefficients == pytest.approx(expected, abs=1e-10)


def test_puiseux_sheet_follows_reference():
    eq = make_equation([0.0], [1.0])
    x = 0.49
    y = exact_cubic(1.0, x)
    s = singular_solution_puiseux(eq, 0.5, 3, reference=(x, y))
    assert s.evaluate(x) == pytest.approx(y, rel=1e-12)


def test_puiseux_with_p_matches_trajectory():
    eq = make_equation([1.0, 0.5], [0.3, 1.0])
    res = integrate_along_path(eq, 1.0, line(0, 3))
    assert res.status is Status.HIT_MOVABLE
    x0 = res.singularity.location
    s = singular_solution_puiseux(eq, x0, 8)
    x = x0 - 1e-3
    near = integrate_along_path(eq, 1.0, line(0, x))
    y = near.final_value
    best = min(abs(s.evaluate(x, k) - y) for k in (0, 1))
    assert best <= 1e-8 * abs(y)


def test_sensitivity_closed_form(cubic_eq):
    # x0 = 1 / (2 y0**2)
    y0 = 1.0
    d = singularity_sensitivity(cubic_eq, 0.0, y0, line(0, 1))
    assert d == pytest.approx(-1.0 / y0 ** 3, rel=1e-6)


def test_singularities_near_path(cubic_eq):
    res = integrate_along_path(cubic_eq, 1.0, line(0.0, 0.5 + 0.05j).__add__(line(0.5 + 0.05j, 1 + 0.1j)))
    assert res.reached
    found = singularities_near_path(res, cubic_eq)
    assert any(abs(z - 0.5) < 1e-8 for z in found)


def test_result_serialisation(cubic_eq):
    res = integrate_along_path(cubic_eq, 1.0, line(0, 1))
    js = res.to_json()
    assert js["status"] == "hit_movable_singularity"
    rows = res.to_csv().strip().splitlines()
    assert rows[0] == "t,re_x,im_x,re_value,im_value,chart"
    assert all(len(r.split(",")) == 6 for r in rows)
