"""Acceptance criteria 1-13, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import cmath
import math
import sys
import time

import numpy as np
import pytest

from abel._rk import integrate as rk_integrate
from abel.bounds import (BoundParams, comparison_F, comparison_H, regularity_radius,
                         safe_disk_radius_at_origin, solution_majorant)
from abel.continuation import Status, ToleranceOptions, integrate_along_path
from abel.core import ArcSegment, ComplexPath, ComplexPolynomial, circle, line, make_equation, polyline
from abel.model import (branches_at, composition_lift, first_integral_H, limit_cycle_roots,
                        model_equation, model_params, model_residual, puiseux_at_origin,
                        quarter_case_cycles, verify_limit_cycle)
from abel.monodromy import (generator_base_point, generator_loops, irreducibility_check, monodromy,
                            permutation_cycles, regular_branch_label)
from abel.poincare import (circle_branch_point, continue_poincare_along_sigma, poincare_map,
                           poincare_branch_exponent_fit)

RESULTS = []


def report(k, ok, detail):
    line_ = f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {detail}"
    RESULTS.append(line_)
    print(line_)
    assert ok, line_


def _rand_complex(rng, scale=1.0):
    return complex(rng.normal(scale=scale), rng.normal(scale=scale))


# ---------------------------------------------------------------------------


def test_criterion_01_limit_cycle_count():
    ok, worst_gap = True, math.inf
    for n in range(1, 9):
        roots = limit_cycle_roots(n, 1.0)
        ok &= len(roots) == n
        gaps = [abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]]
        if gaps:
            worst_gap = min(worst_gap, min(gaps))
    ok &= worst_gap > 1e-8
    e1 = abs(limit_cycle_roots(1, 1.0)[0] + 9 / 4)
    s = 5 * math.sqrt(11)
    oracle = [complex(-115, s) / 54, complex(-115, -s) / 54]
    e2 = max(min(abs(r - o) for o in oracle) for r in limit_cycle_roots(2, 1.0))
    ok &= e1 <= 1e-10 and e2 <= 1e-10
    report(1, ok, f"n roots for n=1..8, min gap {worst_gap:.3g}, n=1 err {e1:.1e}, n=2 err {e2:.1e}")


def test_criterion_02_limit_cycle_realization():
    opts = ToleranceOptions(rel_tol=1e-12)
    worst, count = 0.0, 0
    for n in (1, 2, 3):
        params = model_params(n)
        for y0 in limit_cycle_roots(n, 1.0):
            w = verify_limit_cycle(params, y0, 1.0)
            res = integrate_along_path(model_equation(params), y0, w.path, opts)
            worst = max(worst, abs(res.final_value - y0) / (1 + abs(y0)))
            count += 1
    report(2, worst <= 1e-7, f"{count} orbits closed, worst |y(b)-y0|/(1+|y0|) = {worst:.2e}")


def test_criterion_03_quarter_case():
    cycles = quarter_case_cycles(5)
    ok = len(cycles) == 5
    worst = 0.0
    for j, c in enumerate(cycles):
        ok &= (2 * j + 1) * math.pi < c.y < (2 * j + 2) * math.pi
        worst = max(worst, abs(1 - c.xi - cmath.exp(c.xi)))
    report(3, ok and worst <= 1e-10, f"{len(cycles)} roots, one per interval, max residual {worst:.1e}")


def test_criterion_04_singularity_law():
    rng = np.random.default_rng(4)
    worst = 0.0
    for n in (1, 2, 4):
        params = model_params(n)
        eq = model_equation(params)
        kappa = float(params.kappa)
        for _ in range(20):
            y0 = cmath.rect(rng.uniform(0.3, 3.0), rng.uniform(-math.pi, math.pi))
            x0 = kappa / y0
            res = integrate_along_path(eq, y0, line(0, 2 * x0))
            assert res.status is Status.HIT_MOVABLE
            worst = max(worst, abs(res.singularity.location - x0) / abs(x0))
    res = integrate_along_path(model_equation(model_params(1)), 1.0, line(0, 1))
    e1 = abs(res.singularity.location - 0.75)
    report(4, worst <= 1e-6 and e1 <= 1e-6 * 0.75,
           f"60 blow-up points vs kappa/y0, worst rel err {worst:.1e}; n=1,y0=1 -> {res.singularity.location:.12f}")


# ---------------------------------------------------------------------------


def _random_singular_solution(rng):
    """A random equation and a point (c, y_c) whose solution blows up at a known x0."""
    while True:
        deg_p, deg_q = rng.integers(0, 3, size=2)
        p = ComplexPolynomial(tuple(_rand_complex(rng) for _ in range(deg_p + 1)))
        q = ComplexPolynomial(tuple(_rand_complex(rng) for _ in range(deg_q + 1)))
        eq = make_equation(p, q)
        x0 = _rand_complex(rng, 0.7)
        if any(abs(x0 - r) < 0.5 for r in eq.fixed_singularities) or abs(q(x0)) < 0.3:
            continue
        a0 = -1.0 / (2.0 * q(x0))
        # u with |a0| u**2 = 0.02: integrate dx/du = -u / (p u + q) from x(0) = x0
        u1 = cmath.rect(math.sqrt(0.02 / abs(a0)), rng.uniform(-math.pi, math.pi))

        def f(s, st, u1=u1):
            u = s * u1
            return (-u / (p(st[0]) * u + q(st[0])) * u1,)

        c = rk_integrate(f, 0.0, 1.0, (x0,), rtol=1e-13, atol=1e-15)[0]
        return eq, x0, a0, c, 1.0 / u1


def _singular_limit_samples(eq, x0, c, y_c, hs):
    out = []
    for h in hs:
        x = x0 + (c - x0) * h
        res = integrate_along_path(eq, y_c, line(c, x), ToleranceOptions(rel_tol=1e-12))
        assert res.reached
        out.append((x - x0) * res.final_value ** 2)
    return out


def test_criterion_05_movable_singularity_structure():
    rng = np.random.default_rng(5)
    worst_limit = worst_double = 0.0
    min_single = math.inf
    for _ in range(50):
        eq, x0, a0, c, y_c = _random_singular_solution(rng)
        hit = integrate_along_path(eq, y_c, line(c, 2 * x0 - c))
        assert hit.status is Status.HIT_MOVABLE and abs(hit.singularity.location - x0) < 1e-8
        # (x - x0) y**2 = a0 + A sqrt(x - x0) + ...: Richardson in sqrt(h)
        g1, g2, g3 = _singular_limit_samples(eq, x0, c, y_c, (1e-2, 2.5e-3, 6.25e-4))
        r1, r2 = 2 * g2 - g1, 2 * g3 - g2
        extrap = (4 * r2 - r1) / 3
        worst_limit = max(worst_limit, abs(extrap - a0) / abs(a0))
        radius = 0.5 * abs(c - x0)
        start = x0 + radius * (c - x0) / abs(c - x0)
        lead = integrate_along_path(eq, y_c, line(c, start))
        y_s = lead.final_value
        once = integrate_along_path(eq, y_s, circle(x0, start, 1)).final_value
        twice = integrate_along_path(eq, y_s, circle(x0, start, 2)).final_value
        worst_double = max(worst_double, abs(twice - y_s) / abs(y_s))
        min_single = min(min_single, abs(once - y_s) / abs(y_s))
    ok = worst_limit <= 1e-2 and worst_double <= 1e-6 and min_single >= 1e-2
    report(5, ok, f"50 equations: (x-x0)y^2 -> -1/(2q(x0)) worst rel {worst_limit:.1e}; "
                  f"double loop {worst_double:.1e}; single loop >= {min_single:.2f}")


@pytest.mark.xfail(strict=True, reason="the limit is -1/(2 q(x0)), the reciprocal of -2 q(x0)")
def test_criterion_05_literal_minus_two_q():
    rng = np.random.default_rng(55)
    eq, x0, a0, c, y_c = _random_singular_solution(rng)
    g = _singular_limit_samples(eq, x0, c, y_c, (1e-4,))[0]
    assert abs(g - (-2 * eq.q(x0))) <= 1e-2 * abs(2 * eq.q(x0))


# ---------------------------------------------------------------------------


def test_criterion_06_bound_soundness():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst_ratio = 0.0
    blowups = 0
    for _ in range(200):
        deg_p, deg_q = rng.integers(0, 4, size=2)
        p = ComplexPolynomial(tuple(_rand_complex(rng) for _ in range(deg_p + 1)))
        q = ComplexPolynomial(tuple(_rand_complex(rng) for _ in range(deg_q + 1)))
        eq = make_equation(p, q)
        a = _rand_complex(rng)
        y_a = cmath.rect(10 ** rng.uniform(-2, 1), rng.uniform(-math.pi, math.pi))
        params = BoundParams(abs(a), abs(y_a), eq.K, eq.m)
        rho = regularity_radius(params)
        for k in range(8):
            end = a + 0.999 * rho * cmath.exp(2j * math.pi * k / 8)
            res = integrate_along_path(eq, y_a, line(a, end), ToleranceOptions(rel_tol=1e-9))
            if not res.reached:
                blowups += 1
                continue
            for s in res.samples:
                bound = solution_majorant(params, abs(s.x - a))
                worst_ratio = max(worst_ratio, abs(s.y) / bound)
    grid_ok = all(-1 / (2 * y * y) < comparison_F(y) < comparison_H(y) for y in np.logspace(-6, 6, 481))
    ok = blowups == 0 and worst_ratio <= 1 + 1e-9 and grid_ok
    report(6, ok, f"1600 rays: {blowups} blow-ups inside 0.999 rho, max |y|/majorant {worst_ratio:.3f}, "
                  f"F bracket {'holds' if grid_ok else 'fails'} ({time.perf_counter() - t0:.1f}s)")


def test_criterion_07_first_integral():
    rng = np.random.default_rng(7)
    worst, runs = 0.0, 0
    for n in (1, 2, 3, 5):
        params = model_params(n)
        eq = model_equation(params)
        for _ in range(10):
            y0 = cmath.rect(rng.uniform(0.3, 3), rng.uniform(-math.pi, math.pi))
            end = _rand_complex(rng)
            res = integrate_along_path(eq, y0, polyline([0, 0.5 * _rand_complex(rng), end]))
            if not res.reached:
                continue
            runs += 1
            for s in res.samples:
                try:
                    h = first_integral_H(params, s.x, s.y)
                except Exception:
                    continue
                worst = max(worst, abs(h - y0) / abs(y0))
    hyper = 0.0
    for n in range(1, 7):
        params = model_params(n)
        for v in (float(params.v1), float(params.v2)):
            for x in (0.3, -1.2 + 0.5j, 2.0j):
                hyper = max(hyper, abs(model_residual(params, x, v / x, -v / x ** 2)))
    report(7, worst <= 1e-6 and hyper <= 1e-12 and runs > 0,
           f"{runs} reached runs, max |H-y0|/|y0| {worst:.1e}; hyperbola residual {hyper:.1e}")


def test_criterion_08_monodromy():
    ok = True
    details = []
    for n in range(1, 7):
        params = model_params(n)
        y0 = 0.8 + 0.35j
        loops = generator_loops(params, y0)
        w = monodromy(params, y0, loops["w"]).permutation
        z = monodromy(params, y0, loops["z"]).permutation
        both = monodromy(params, y0, loops["both"]).permutation
        reg = regular_branch_label(params, y0, generator_base_point(params, y0))
        w_t = sorted(len(c) for c in permutation_cycles(w)) == [1] * (n - 1) + [2]
        z_cyc = [c for c in permutation_cycles(z) if reg not in c]
        z_ok = z[reg] == reg and len(z_cyc) == 1 and len(z_cyc[0]) == n
        b_ok = len(permutation_cycles(both)) == 1
        irr = irreducibility_check(params, y0).irreducible
        ok &= w_t and z_ok and b_ok and irr
        details.append(f"n={n}:{'ok' if w_t and z_ok and b_ok and irr else 'bad'}")
    report(8, ok, "transposition / n-cycle / (n+1)-cycle / transitive: " + " ".join(details))


def test_criterion_09_puiseux_exponents():
    ok = True
    parts = []
    for n in (1, 2, 3):
        params = model_params(n)
        y0 = 1.3
        v1 = float(params.v1)
        mu = puiseux_at_origin(params, y0).coefficients[-1]
        xs = np.logspace(-9, -7, 9)
        r = []
        for x in xs:
            us = branches_at(params, y0, x).u_roots
            # principal branch: the escaping root whose correction is nearest mu x^(1+1/n)
            pred = mu * x ** (1 + 1 / n)
            r.append(min((u - x / v1 for u in us), key=lambda d: abs(d - pred)))
        slope = np.polyfit(np.log(xs), np.log(np.abs(r)), 1)[0]
        coef = r[0] / xs[0] ** (1 + 1 / n)
        e_slope = abs(slope - (1 + 1 / n))
        e_coef = abs(coef - mu) / abs(mu)
        ok &= e_slope <= 0.02 and e_coef <= 0.01
        parts.append(f"n={n}: slope {slope:.4f}, coef err {e_coef:.1e}")
    report(9, ok, "; ".join(parts))


def test_criterion_10_poincare_singularity():
    eq = model_equation(model_params(1))
    fit = poincare_branch_exponent_fit(eq, 0, 1, line(0, 1), 0.75)
    vals = circle_branch_point(eq, 0, 1, line(0, 1), 0.75)
    restore = abs(vals[2] - vals[0]) / abs(vals[0])
    single = abs(vals[1] - vals[0]) / abs(vals[0])
    ok = -0.55 <= fit.slope <= -0.45 and restore <= 1e-6 and single >= 1e-2
    report(10, ok, f"exponent {fit.slope:.4f}; double loop {restore:.1e}, single loop {single:.2f}")


def test_criterion_11_path_deformation():
    eq = model_equation(model_params(1))
    sigma = ComplexPath((ArcSegment(0j, 1.0, -math.pi / 4, math.pi / 4),))
    germ, trace = continue_poincare_along_sigma(eq, 0, 1, line(0, 1), sigma)
    direct = poincare_map(eq, 0, 1, trace.final_path, sigma.end).value
    e_direct = abs(germ.value - direct) / abs(direct)
    back, _ = continue_poincare_along_sigma(eq, 0, 1, line(0, 1), sigma.reversed(),
                                            initial_detours=trace.detours)
    start = poincare_map(eq, 0, 1, line(0, 1), sigma.start).value
    e_back = abs(back.value - start) / abs(start)
    _, idle = continue_poincare_along_sigma(eq, 0, 1, line(0, 1), line(0.2, 0.2 + 0.05j))
    still = not idle.detours and all(p is idle.base_path for p in idle.paths)
    ok = e_direct <= 1e-8 and e_back <= 1e-8 and still
    report(11, ok, f"germ vs direct {e_direct:.1e}; sigma then reverse {e_back:.1e}; "
                   f"far case path unchanged: {still}")


def test_criterion_12_composition_centers():
    lift = composition_lift(2 / 9, ComplexPolynomial((0.0, 2.0)))
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(10):
        y = cmath.rect(rng.uniform(0.05, 0.5), rng.uniform(-math.pi, math.pi))
        phi = poincare_map(lift.equation, -1, 1, line(-1, 1), y).value
        worst = max(worst, abs(phi - y))
    report(12, worst <= 1e-8, f"p = 2x, a = -1, b = 1: max |phi(y) - y| over 10 values {worst:.1e}")


def test_criterion_13_germ_path_independence():
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(20):
        deg_p, deg_q = rng.integers(0, 3, size=2)
        p = ComplexPolynomial(tuple(_rand_complex(rng) for _ in range(deg_p + 1)))
        q = ComplexPolynomial(tuple(_rand_complex(rng) for _ in range(deg_q + 1)))
        eq = make_equation(p, q)

        def pick(limit):
            while True:
                z = cmath.rect(rng.uniform(0, limit), rng.uniform(-math.pi, math.pi))
                if all(abs(z - r) > 0.05 for r in eq.fixed_singularities):
                    return z

        a, b = pick(0.7), pick(1.4)
        path1 = polyline([a, pick(1.4), b])
        path2 = polyline([a, pick(1.4), pick(1.4), b])
        # every point lies in D_R(0) and |a| <= R/2 once R >= 3: regular on D_R
        y_abs = 1.0
        while safe_disk_radius_at_origin(y_abs, eq.K, eq.m) < 3.0:
            y_abs /= 2.0
        y_a = cmath.rect(0.01 * y_abs, rng.uniform(-math.pi, math.pi))
        v1 = poincare_map(eq, a, b, path1, y_a).value
        v2 = poincare_map(eq, a, b, path2, y_a).value
        worst = max(worst, abs(v1 - v2) / abs(v1))
    report(13, worst <= 1e-9, f"20 path pairs, max relative germ difference {worst:.1e}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_") and "literal" not in name:
            try:
                fn()
            except AssertionError:
                failed += 1
            except Exception as exc:  # report and keep going
                failed += 1
                print(f"FAIL {name}: {type(exc).__name__}: {exc}")
    sys.exit(1 if failed else 0)
