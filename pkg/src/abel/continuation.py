"""Analytic continuation of solutions along paths.

The solution is integrated in the chart ``y`` until ``|y|`` exceeds a threshold,
then in the chart ``u = 1/y`` where ``du/dx = -(p u + q) / u`` stays regular
across a movable singularity (``u`` passes through zero like a square root).
While in the ``u`` chart the singular point ahead is located by exchanging
the roles of the variables: ``dx/du = -u / (p(x) u + q(x))`` is integrated on
a straight segment from the current ``u`` down to ``u = 0``.
"""

from __future__ import annotations

import cmath
import csv
import enum
import io
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import NamedTuple

from . import _rk
from .core import AbelEquation, ComplexPath, ComplexPolynomial, PuiseuxSeries, complex_to_pair, line
from .errors import DenominatorVanished, DomainError, PerturbationEscaped, StepFailure

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ToleranceOptions:
    """Numerical knobs shared by continuation, Poincare-map and model code.

    Distances called *relative* are scaled by ``1 + |x|`` at the point concerned.
    """

    rel_tol: float = 1e-10
    chart_switch_threshold: float = 1e4
    chart_hysteresis: float = 0.5
    min_locate_magnitude: float = 1e3
    locate_rel_tol: float = 1e-12
    denominator_floor: float = 1e-13
    fixed_singularity_radius: float = 1e-4
    hit_tolerance: float = 1e-8
    sensitivity_floor: float = 1e-12
    max_steps: int = 200000
    min_clearance: float = 0.02
    fixed_point_tol: float = 1e-9
    max_newton: int = 40

    def __post_init__(self):
        for name in ("rel_tol", "chart_switch_threshold", "chart_hysteresis", "min_locate_magnitude",
                     "locate_rel_tol", "denominator_floor", "fixed_singularity_radius",
                     "hit_tolerance", "sensitivity_floor", "min_clearance", "fixed_point_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"tolerance {name} must be positive, got {v!r}")
        if not 0 < self.chart_hysteresis < 1:
            raise DomainError("chart_hysteresis must lie in (0, 1)")

    def with_overrides(self, **kw) -> "ToleranceOptions":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULT_OPTIONS = ToleranceOptions()


class Status(str, enum.Enum):
    REACHED = "reached"
    HIT_MOVABLE = "hit_movable_singularity"
    HIT_FIXED = "hit_fixed_singularity"
    STEP_FAILURE = "step_failure"


class Chart(str, enum.Enum):
    Y = "Y"
    U = "U"


class Sample(NamedTuple):
    t: float
    x: complex
    value: complex
    chart: Chart

    @property
    def y(self) -> complex:
        if self.chart is Chart.Y:
            return self.value
        return 1.0 / self.value if self.value != 0 else complex(math.inf, 0)


@dataclass(frozen=True)
class SingularityRecord:
    location: complex
    kind: str  # "movable" or "fixed"
    ramification_order: int
    leading_coefficient: complex
    puiseux: PuiseuxSeries | None = None
    path_parameter: float | None = None
    fit_residual: float | None = None

    def to_json(self) -> dict:
        return {
            "location": complex_to_pair(self.location),
            "kind": self.kind,
            "ramification_order": self.ramification_order,
            "leading_coefficient": complex_to_pair(self.leading_coefficient),
            "puiseux": None if self.puiseux is None else self.puiseux.to_json(),
            "path_parameter": self.path_parameter,
            "fit_residual": self.fit_residual,
        }


@dataclass
class ContinuationResult:
    samples: list[Sample]
    status: Status
    final_value: complex | None = None
    final_derivative: complex | None = None
    singularity: SingularityRecord | None = None
    fixed_point: complex | None = None
    t_end: float = 0.0
    message: str = ""
    chart_switches: list[tuple[float, complex, complex]] = field(default_factory=list)

    @property
    def reached(self) -> bool:
        return self.status is Status.REACHED

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "final_value": None if self.final_value is None else complex_to_pair(self.final_value),
            "final_derivative": (None if self.final_derivative is None
                                 else complex_to_pair(self.final_derivative)),
            "singularity": None if self.singularity is None else self.singularity.to_json(),
            "fixed_point": None if self.fixed_point is None else complex_to_pair(self.fixed_point),
            "t_end": self.t_end,
            "message": self.message,
            "samples": [[s.t, *complex_to_pair(s.x), *complex_to_pair(s.value), s.chart.value]
                        for s in self.samples],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re_x", "im_x", "re_value", "im_value", "chart"])
        for s in self.samples:
            w.writerow([repr(s.t), repr(s.x.real), repr(s.x.imag), repr(s.value.real),
                        repr(s.value.imag), s.chart.value])
        return buf.getvalue()


class _Switch(Exception):
    def __init__(self, s, state):
        self.s, self.state = s, state


class _Stop(Exception):
    def __init__(self, status, record=None, fixed=None, t=None):
        self.status, self.record, self.fixed, self.t = status, record, fixed, t


def _fixed_radius(opts: ToleranceOptions, xi: complex) -> float:
    return opts.fixed_singularity_radius * (1.0 + abs(xi))


def _y_field(eq, seg, variational):
    p, q = eq.p, eq.q
    if variational:
        def f(s, st):
            x = seg.point(s)
            T = seg.tangent(s)
            y, Y = st
            px, qx = p(x), q(x)
            y2 = y * y
            return ((px * y2 + qx * y2 * y) * T, (2.0 * px * y + 3.0 * qx * y2) * Y * T)
    else:
        def f(s, st):
            x = seg.point(s)
            y = st[0]
            y2 = y * y
            return ((p(x) * y2 + q(x) * y2 * y) * seg.tangent(s),)
    return f


def _u_field(eq, seg, variational):
    p, q = eq.p, eq.q
    if variational:
        def f(s, st):
            x = seg.point(s)
            T = seg.tangent(s)
            u, U = st
            qx = q(x)
            return (-(p(x) * u + qx) / u * T, qx / (u * u) * U * T)
    else:
        def f(s, st):
            x = seg.point(s)
            u = st[0]
            return (-(p(x) * u + q(x)) / u * seg.tangent(s),)
    return f


def _to_u(state):
    y = state[0]
    u = 1.0 / y
    if len(state) == 1:
        return (u,)
    return (u, -u * u * state[1])


def _to_y(state):
    u = state[0]
    y = 1.0 / u
    if len(state) == 1:
        return (y,)
    return (y, -y * y * state[1])


def _check_singular(eq, path, t, x, u, opts):
    """Raise ``_Stop`` when the path runs into the singular point ahead."""
    xi, dist = eq.nearest_fixed_singularity(x)
    if xi is not None and dist <= _fixed_radius(opts, xi):
        raise _Stop(Status.HIT_FIXED, fixed=xi, t=t)
    try:
        rec = locate_movable_singularity(eq, x, 1.0 / u, opts, _check_fixed=False)
    except (DenominatorVanished, StepFailure):
        return
    x0 = rec.location
    tol = opts.hit_tolerance * (1.0 + abs(x0))
    window = t + 2.0 * abs(x - x0) + 10.0 * tol
    t_hit, d = path.closest_point(x0, t, min(path.length, window))
    if d > tol:
        return
    xi, dist = eq.nearest_fixed_singularity(x0)
    if xi is not None and dist <= _fixed_radius(opts, xi):
        raise _Stop(Status.HIT_FIXED, fixed=xi, t=t_hit)
    raise _Stop(Status.HIT_MOVABLE, record=replace(rec, path_parameter=t_hit), t=t_hit)


def integrate_along_path(eq: AbelEquation, y_start: complex, path: ComplexPath,
                         opts: ToleranceOptions | None = None, variational: bool = False,
                         keep_samples: bool = True) -> ContinuationResult:
    """Continue the solution with ``y(path.start) = y_start`` along ``path``.

    Parameters
    ----------
    variational : bool
        Also integrate ``dY/dx = (2 p y + 3 q y**2) Y`` with ``Y(a) = 1`` and
        report ``dy(b)/dy(a)`` as ``final_derivative``.
    keep_samples : bool
        Record every accepted step; switch off for bulk evaluation.

    Returns
    -------
    ContinuationResult
        ``status`` tells whether the endpoint was reached; singular hits are
        reported through the status rather than raised.
    """
    opts = opts or DEFAULT_OPTIONS
    y_start = complex(y_start)
    if not (math.isfinite(y_start.real) and math.isfinite(y_start.imag)):
        raise DomainError("y_start must be finite")
    samples: list[Sample] = []
    deriv0 = 1.0 + 0j if variational else None
    if y_start == 0:
        if keep_samples:
            samples = [Sample(0.0, path.start, 0j, Chart.Y), Sample(path.length, path.end, 0j, Chart.Y)]
        return ContinuationResult(samples, Status.REACHED, 0j, deriv0, t_end=path.length)

    thr = opts.chart_switch_threshold
    back = opts.chart_hysteresis * thr
    state = (y_start, 1.0 + 0j) if variational else (y_start,)
    chart = Chart.Y
    if abs(y_start) > thr:
        chart, state = Chart.U, _to_u(state)
    if keep_samples:
        samples.append(Sample(0.0, path.start, state[0], chart))
    switches: list[tuple[float, complex, complex]] = []
    h_last = [None]

    def finish(status, t_end, msg="", record=None, fixed=None):
        return ContinuationResult(samples, status, None, None, record, fixed, t_end, msg, switches)

    try:
        if chart is Chart.U:
            _check_singular(eq, path, 0.0, path.start, state[0], opts)
    except _Stop as stop:
        return finish(stop.status, stop.t, "singular at start", stop.record, stop.fixed)

    for k, seg in enumerate(path.segments):
        L = seg.length
        offset = path.offsets[k]
        if L == 0:
            continue
        s = 0.0
        while s < L:
            cur = chart
            f = _y_field(eq, seg, variational) if cur is Chart.Y else _u_field(eq, seg, variational)
            prev = [s]

            def hook(sv, st, cur=cur, prev=prev, seg=seg, offset=offset):
                h_last[0] = abs(sv - prev[0])
                prev[0] = sv
                tg = offset + sv
                if keep_samples:
                    samples.append(Sample(tg, seg.point(sv), st[0], cur))
                if cur is Chart.Y:
                    if abs(st[0]) > thr:
                        raise _Switch(sv, st)
                else:
                    if abs(st[0]) * back > 1.0:
                        raise _Switch(sv, st)
                    _check_singular(eq, path, tg, seg.point(sv), st[0], opts)

            # absolute floor follows the solution's scale; u keeps shrinking in chart U
            scale = min(1.0, abs(state[0])) * (1e-4 if cur is Chart.U else 1.0)
            try:
                state = _rk.integrate(f, s, L, state, rtol=opts.rel_tol, atol=opts.rel_tol * scale,
                                      h0=h_last[0], max_steps=opts.max_steps, on_step=hook)
                s = L
            except _Switch as sw:
                s = sw.s
                old = sw.state
                if cur is Chart.Y:
                    chart, state = Chart.U, _to_u(old)
                    switches.append((offset + s, old[0], state[0]))
                    try:
                        _check_singular(eq, path, offset + s, seg.point(s), state[0], opts)
                    except _Stop as stop:
                        return finish(stop.status, stop.t, "", stop.record, stop.fixed)
                else:
                    chart, state = Chart.Y, _to_y(old)
                    switches.append((offset + s, state[0], old[0]))
            except _Stop as stop:
                log.debug("continuation stopped: %s at t=%s", stop.status.value, stop.t)
                return finish(stop.status, stop.t, "", stop.record, stop.fixed)
            except (StepFailure, ZeroDivisionError, OverflowError) as exc:
                return finish(Status.STEP_FAILURE, offset + s, str(exc))

    if chart is Chart.U:
        state = _to_y(state)
    final = state[0]
    deriv = state[1] if variational else None
    return ContinuationResult(samples, Status.REACHED, final, deriv, None, None, path.length, "",
                              switches)


# ---------------------------------------------------------------------------
# singularity localisation
# ---------------------------------------------------------------------------


def locate_movable_singularity(eq: AbelEquation, c_point: complex, y_c: complex,
                               opts: ToleranceOptions | None = None,
                               _check_fixed: bool = True) -> SingularityRecord:
    """Locate the square-root singularity reached from ``(c_point, y_c)``.

    Integrates ``dx/du = -u / (p(x) u + q(x))`` on the straight segment from
    ``u = 1/y_c`` to ``u = 0``; ``x(0)`` is the singular point. The leading
    coefficient ``a0 = -1/(2 q(x0))`` of ``x - x0 ~ a0 u**2`` is checked
    against the integrated curve near ``u = 0`` and the relative mismatch is
    stored as ``fit_residual``.

    The straight segment in ``u`` is reliable once ``|y_c|`` is large
    (``opts.min_locate_magnitude``); from moderate values it still returns
    the singularity reached along that segment.

    Raises
    ------
    DenominatorVanished
        If ``p(x) u + q(x)`` becomes too small on the way, or the endpoint
        is a fixed singularity.
    """
    opts = opts or DEFAULT_OPTIONS
    y_c = complex(y_c)
    if y_c == 0:
        raise DomainError("cannot locate a singularity from y = 0")
    u_c = 1.0 / y_c
    p, q = eq.p, eq.q
    floor = opts.denominator_floor * eq.K

    def f(s, st):
        x = st[0]
        u = u_c * (1.0 - s)
        D = p(x) * u + q(x)
        if abs(D) < floor:
            raise DenominatorVanished(f"p(x) u + q(x) vanished near x = {x}")
        return (u * u_c / D,)

    u_fit = min(abs(u_c) / 2.0, 1e-4)
    s_fit = 1.0 - u_fit / abs(u_c)
    x_fit = _rk.integrate(f, 0.0, s_fit, (complex(c_point),), rtol=opts.locate_rel_tol,
                          atol=opts.locate_rel_tol, h0=min(0.1, s_fit), max_steps=opts.max_steps)[0]
    x0 = _rk.integrate(f, s_fit, 1.0, (x_fit,), rtol=opts.locate_rel_tol,
                       atol=opts.locate_rel_tol, max_steps=opts.max_steps)[0]
    q0 = q(x0)
    if abs(q0) < floor:
        raise DenominatorVanished(f"singular point {x0} is a root of q")
    if _check_fixed:
        xi, dist = eq.nearest_fixed_singularity(x0)
        if xi is not None and dist <= _fixed_radius(opts, xi):
            raise DenominatorVanished(f"singular point {x0} coincides with fixed singularity {xi}")
    a0 = -1.0 / (2.0 * q0)
    u_s = u_c * (1.0 - s_fit)
    resid = abs((x_fit - x0) / (u_s * u_s) - a0) / abs(a0)
    return SingularityRecord(location=x0, kind="movable", ramification_order=2,
                             leading_coefficient=a0, fit_residual=resid)


# ---------------------------------------------------------------------------
# Puiseux expansion at a movable singularity
# ---------------------------------------------------------------------------


def _ser_mul(a, b, n):
    out = [0j] * n
    for i, ai in enumerate(a[:n]):
        if ai == 0:
            continue
        for j in range(min(len(b), n - i)):
            out[i + j] += ai * b[j]
    return out


def _ser_inv(a, n):
    out = [0j] * n
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        acc = 0j
        for j in range(1, min(k, len(a) - 1) + 1):
            acc += a[j] * out[k - j]
        out[k] = -acc / a[0]
    return out


def _ser_sqrt(a, n):
    """Square root of a series with ``a[0] = 1``."""
    out = [0j] * n
    out[0] = 1.0 + 0j
    for k in range(1, n):
        acc = a[k] if k < len(a) else 0j
        for j in range(1, k):
            acc -= out[j] * out[k - j]
        out[k] = acc / 2.0
    return out


def _ser_compose(f, g, n):
    """``f(g(s))`` for ``g[0] = 0``."""
    out = [0j] * n
    for c in reversed(f[:n]):
        out = _ser_mul(out, g, n)
        out[0] += c
    return out


def _ser_revert(g, n):
    """Inverse of ``s = u * g(u)`` as ``u = s * h(s)``; ``g[0] != 0``."""
    h = [0j] * n
    h[0] = 1.0 / g[0]
    for _ in range(n):
        u = [0j] + h[: n - 1]  # u(s) = s h(s)
        gu = _ser_compose(g, u, n)
        h = _ser_inv(gu, n)
    return h


def _shifted_coefficients(poly: ComplexPolynomial, x0: complex) -> list[complex]:
    """Taylor coefficients of ``poly`` at ``x0``."""
    return list(poly.compose(ComplexPolynomial((x0, 1.0))).coefficients) or [0j]


def inverted_series(eq: AbelEquation, x0: complex, order: int) -> list[complex]:
    """Coefficients ``e_k`` of ``x - x0 = sum_{k>=2} e_k u**k`` up to ``u**order``."""
    P = _shifted_coefficients(eq.p, x0)
    Q = _shifted_coefficients(eq.q, x0)
    n = order + 1
    e = [0j] * n
    if Q[0] == 0:
        raise DenominatorVanished("x0 is a fixed singularity")
    e[2] = -1.0 / (2.0 * Q[0])
    for k in range(3, n):
        # D(u) = q(x0 + xi) + u p(x0 + xi) with xi truncated to known terms
        xi = e[:k - 1] + [0j] * (n - k + 1)
        D = [0j] * n
        power = [1.0 + 0j] + [0j] * (n - 1)
        for j in range(max(len(P), len(Q))):
            if j < len(Q):
                for i in range(n):
                    D[i] += Q[j] * power[i]
            if j < len(P):
                for i in range(n - 1):
                    D[i + 1] += P[j] * power[i]
            power = _ser_mul(power, xi, n)
        # coefficient of u^(k-1) in D * xi' = -u
        acc = 0j
        for i in range(1, k - 1):
            acc += D[i] * (k - i) * e[k - i]
        e[k] = -acc / (k * D[0])
    return e


def singular_solution_puiseux(eq: AbelEquation, x0: complex, num_terms: int = 6,
                              reference: tuple[complex, complex] | None = None) -> PuiseuxSeries:
    """Puiseux series ``y = sum_k c_k (x - x0)**((k - 1)/2)`` of the solution singular at ``x0``.

    Built by solving the inverted equation as a power series in ``u``,
    reverting it to ``u`` as a series in ``(x - x0)**(1/2)`` and taking the
    reciprocal. ``c_0**2 = -1/(2 q(x0))``. With ``reference = (x, y)`` the
    square-root sheet is fixed so that the series matches ``y`` at ``x``.
    """
    if not 1 <= num_terms <= 12:
        raise DomainError("num_terms must lie in 1..12")
    xi, dist = eq.nearest_fixed_singularity(x0)
    if xi is not None and dist <= _fixed_radius(DEFAULT_OPTIONS, xi):
        raise DenominatorVanished(f"{x0} is a fixed singularity")
    n = num_terms + 1
    e = inverted_series(eq, complex(x0), n + 1)
    e2 = e[2]
    # xi / e2 = u^2 (1 + r(u)),  s = sqrt(xi/e2) = u g(u)
    ratio = [c / e2 for c in e[2:n + 2]]
    g = _ser_sqrt(ratio, n)
    h = _ser_revert(g, n)  # u = s h(s)
    w = _ser_inv(h, n)  # y = w(s) / s
    root_e2 = cmath.sqrt(e2)
    coeffs = [w[k] * root_e2 ** (1 - k) for k in range(num_terms)]
    series = PuiseuxSeries(complex(x0), 2, Fraction(-1, 2), tuple(coeffs))
    if reference is not None:
        xr, yr = reference
        if abs(series.evaluate(xr, 1) - yr) < abs(series.evaluate(xr, 0) - yr):
            flipped = tuple(c * (-1) ** (k - 1) for k, c in enumerate(coeffs))
            series = PuiseuxSeries(complex(x0), 2, Fraction(-1, 2), flipped)
    return series


# ---------------------------------------------------------------------------
# dependence of the singular point on the initial value
# ---------------------------------------------------------------------------


def approach_parameter(path: ComplexPath, t_hit: float, x0: complex, distance: float) -> float:
    """Largest ``t < t_hit`` with ``|path(t) - x0| >= distance`` (coarse, by bisection)."""
    lo, hi = 0.0, t_hit
    if abs(path.point(lo) - x0) < distance:
        return 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if abs(path.point(mid) - x0) >= distance:
            lo = mid
        else:
            hi = mid
    return lo


def singularity_from_path_point(eq: AbelEquation, y_a: complex, path: ComplexPath, t_c: float,
                                opts: ToleranceOptions | None = None) -> SingularityRecord:
    """Continue to ``path(t_c)`` and locate the singular point reached from there."""
    opts = opts or DEFAULT_OPTIONS
    sub = path.subpath(0.0, t_c) if t_c > 0 else line(path.start, path.start)
    res = integrate_along_path(eq, y_a, sub, opts, keep_samples=False)
    if not res.reached:
        raise PerturbationEscaped(f"continuation stopped early ({res.status.value})")
    return locate_movable_singularity(eq, sub.end, res.final_value, opts)


def approach_scale(eq: AbelEquation, x0: complex, path: ComplexPath) -> float:
    """Distance from ``x0`` at which singular points are re-located."""
    ell = 1e-2 * (1.0 + abs(x0))
    for xi in eq.fixed_singularities:
        ell = min(ell, 0.25 * abs(x0 - xi))
    ell = min(ell, 0.5 * abs(x0 - path.start))
    return ell


def singularity_sensitivity(eq: AbelEquation, a: complex, y_a: complex, path: ComplexPath,
                            opts: ToleranceOptions | None = None) -> complex:
    """``dx0/dy_a`` by central differences with step ``max(1e-6, 1e-6 |y_a|)``.

    Both perturbed solutions are continued to a point at distance
    :func:`approach_scale` before the singular point and located from there,
    since a perturbed singularity generally leaves the path.

    Raises
    ------
    PerturbationEscaped
        If the unperturbed continuation is regular or the perturbed singular
        points are not close to the original one.
    """
    opts = opts or DEFAULT_OPTIONS
    if abs(path.start - a) > 1e-12 * (1.0 + abs(a)):
        raise DomainError("path must start at a")
    base = integrate_along_path(eq, y_a, path, opts, keep_samples=False)
    if base.status is not Status.HIT_MOVABLE:
        raise PerturbationEscaped(f"unperturbed continuation is {base.status.value}")
    x0 = base.singularity.location
    ell = approach_scale(eq, x0, path)
    t_c = approach_parameter(path, base.singularity.path_parameter, x0, ell)
    h = max(1e-6, 1e-6 * abs(y_a))
    plus = singularity_from_path_point(eq, y_a + h, path, t_c, opts).location
    minus = singularity_from_path_point(eq, y_a - h, path, t_c, opts).location
    if max(abs(plus - x0), abs(minus - x0)) > 0.5 * ell:
        raise PerturbationEscaped("perturbed singular points moved away")
    d = (plus - minus) / (2.0 * h)
    if abs(d) <= opts.sensitivity_floor:
        raise PerturbationEscaped("sensitivity vanished")
    return d


def singularities_near_path(result: ContinuationResult, eq: AbelEquation,
                            opts: ToleranceOptions | None = None) -> list[complex]:
    """Movable singular points suggested by local maxima of ``|y|`` along a run.

    At a peak the distance to the nearby singularity is about
    ``1 / (2 |q| |y|**2)``; peaks where that estimate is small compared with
    the step geometry are located from the peak point.
    """
    opts = opts or DEFAULT_OPTIONS
    found: list[complex] = []
    ys = [abs(s.y) for s in result.samples]
    for i in range(1, len(ys) - 1):
        if not (ys[i] >= ys[i - 1] and ys[i] >= ys[i + 1]) or ys[i] < 2.0:
            continue
        s = result.samples[i]
        qx = abs(eq.q(s.x))
        if qx == 0:
            continue
        try:
            rec = locate_movable_singularity(eq, s.x, s.y, opts)
        except (DenominatorVanished, StepFailure):
            continue
        if all(abs(rec.location - f) > 1e-6 * (1 + abs(f)) for f in found):
            found.append(rec.location)
    return found
