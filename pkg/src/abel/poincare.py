"""The Poincare map ``phi: y(a) -> y(b)`` of a path from ``a`` to ``b``.

Besides plain evaluation with the variational derivative this module
continues ``phi`` along a curve ``sigma`` of initial values while deforming
the path around singular points that approach it, locates the real curve
``gamma`` of initial values whose singular point lands on the path, and
measures the square-root branching of ``phi`` where that point reaches ``b``.
"""

from __future__ import annotations

import cmath
import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .continuation import (DEFAULT_OPTIONS, Status, ToleranceOptions, approach_parameter,
                           approach_scale, integrate_along_path, singularities_near_path,
                           singularity_from_path_point)
from .core import ArcSegment, ComplexPath, LineSegment, complex_to_pair
from .errors import (DeformationFailed, DomainError, FitRejected, PerturbationEscaped,
                     SingularOnPath, StepFailure)

log = logging.getLogger(__name__)


@dataclass
class PoincareGerm:
    a: complex
    b: complex
    path: ComplexPath
    y_a: complex
    value: complex
    derivative: complex

    def to_json(self) -> dict:
        return {"a": complex_to_pair(self.a), "b": complex_to_pair(self.b),
                "y_a": complex_to_pair(self.y_a), "value": complex_to_pair(self.value),
                "derivative": complex_to_pair(self.derivative), "path": self.path.to_json()}


def _check_ends(path: ComplexPath, a: complex, b: complex):
    scale = 1e-9 * (1.0 + max(abs(a), abs(b)))
    if abs(path.start - a) > scale or abs(path.end - b) > scale:
        raise DomainError("path must run from a to b")


def poincare_map(eq, a: complex, b: complex, path: ComplexPath, y_a: complex,
                 opts: ToleranceOptions | None = None) -> PoincareGerm:
    """Evaluate ``phi(y_a)`` and ``dphi/dy_a`` along ``path``.

    Raises
    ------
    SingularOnPath
        If the continuation runs into a singular point; the exception
        carries the :class:`SingularityRecord` or the fixed singularity.
    StepFailure
        If the integrator cannot meet the tolerance.
    """
    a, b = complex(a), complex(b)
    _check_ends(path, a, b)
    res = integrate_along_path(eq, y_a, path, opts, variational=True, keep_samples=False)
    if res.status in (Status.HIT_MOVABLE, Status.HIT_FIXED):
        where = res.singularity.location if res.singularity else res.fixed_point
        raise SingularOnPath(f"continuation from y_a = {y_a} is singular at x = {where}",
                             record=res.singularity, fixed_point=res.fixed_point)
    if res.status is Status.STEP_FAILURE:
        raise StepFailure(res.message)
    return PoincareGerm(a, b, path, complex(y_a), res.final_value, res.final_derivative)


# ---------------------------------------------------------------------------
# periodic solutions
# ---------------------------------------------------------------------------


@dataclass
class FixedPointReport:
    roots: list[complex]
    failures: list[tuple[complex, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"roots": [complex_to_pair(r) for r in self.roots],
                "failures": [{"seed": complex_to_pair(s), "reason": r} for s, r in self.failures]}


def fixed_point_search(eq, a, b, path, seeds, opts: ToleranceOptions | None = None) -> FixedPointReport:
    """Newton iteration on ``phi(y) - y`` from every seed; failures are recorded per seed."""
    opts = opts or DEFAULT_OPTIONS
    roots: list[complex] = [0j]
    failures = []

    def add(r):
        if all(abs(r - s) > 1e-8 * (1.0 + abs(s)) for s in roots):
            roots.append(r)

    for seed in seeds:
        y = complex(seed)
        if not (math.isfinite(y.real) and math.isfinite(y.imag)):
            raise DomainError("seeds must be finite")
        try:
            germ = poincare_map(eq, a, b, path, y, opts)
            for _ in range(opts.max_newton):
                g = germ.value - y
                dg = germ.derivative - 1.0
                scale = 1.0 + abs(y)
                if g == 0:
                    add(y)
                    break
                if dg == 0:
                    raise ArithmeticError("derivative of phi(y) - y vanished")
                step = g / dg
                # the step test keeps multiple roots such as y = 0 from stopping early
                if abs(g) <= opts.fixed_point_tol * scale and abs(step) <= 1e-10 * scale:
                    add(y)
                    break
                for _ in range(12):
                    trial = y - step
                    try:
                        tg = poincare_map(eq, a, b, path, trial, opts)
                    except SingularOnPath:
                        step /= 2.0
                        continue
                    if abs(tg.value - trial) < abs(g) or abs(step) < 1e-14:
                        break
                    step /= 2.0
                else:
                    raise ArithmeticError("damped Newton step failed")
                y, germ = trial, tg
            else:
                raise ArithmeticError("no convergence")
        except (ArithmeticError, SingularOnPath, StepFailure) as exc:
            failures.append((complex(seed), str(exc)))
    return FixedPointReport(roots, failures)


def find_fixed_points(eq, a, b, path, seeds, opts: ToleranceOptions | None = None) -> list[complex]:
    """Fixed points of ``phi`` (periodic solutions ``y(a) = y(b)``); always contains 0."""
    return fixed_point_search(eq, a, b, path, seeds, opts).roots


# ---------------------------------------------------------------------------
# continuation of phi along a curve of initial values
# ---------------------------------------------------------------------------


@dataclass
class Detour:
    """U-shaped bypass of a singular point on line segment ``segment`` of the base path.

    The segment is left at ``foot - radius``, shifted by ``height`` along the
    push normal ``side * i * tangent``, led around a semicircle of
    ``radius`` centred at ``foot + height * normal`` and brought back.
    """

    segment: int
    foot: float
    side: int
    height: float
    radius: float
    obstacle: complex

    def to_json(self) -> dict:
        return {"segment": self.segment, "foot": self.foot, "side": self.side,
                "height": self.height, "radius": self.radius,
                "obstacle": complex_to_pair(self.obstacle)}


def deformed_path(base: ComplexPath, detours: list[Detour]) -> ComplexPath:
    """Base path with every detour spliced into its line segment."""
    if not detours:
        return base
    segs: list = []

    def add_line(p, q):
        if abs(q - p) > 0:
            segs.append(LineSegment(p, q))

    for k, seg in enumerate(base.segments):
        mine = sorted((d for d in detours if d.segment == k), key=lambda d: d.foot)
        if not mine:
            segs.append(seg)
            continue
        e = seg.tangent()
        theta = cmath.phase(e)
        cur = seg.start
        for d in mine:
            normal = 1j * e * d.side
            foot = seg.start + d.foot * e
            A, B = foot - d.radius * e, foot + d.radius * e
            lift = d.height * normal
            add_line(cur, A)
            add_line(A, A + lift)
            start_angle = theta + math.pi if d.side > 0 else theta - math.pi
            arc = ArcSegment(foot + lift, d.radius, start_angle, theta)
            segs.append(arc)
            cur = arc.end
            if d.height > 0:
                add_line(cur, B)
                cur = B
        add_line(cur, seg.end)
    return ComplexPath(tuple(segs))


@dataclass
class DeformationTrace:
    base_path: ComplexPath
    sigma_samples: list[tuple[float, complex]]
    paths: list[ComplexPath]
    values: list[complex]
    clearance: float
    detours: list[Detour]

    @property
    def final_path(self) -> ComplexPath:
        return self.paths[-1]

    def to_json(self) -> dict:
        return {
            "sigma_samples": [[t, *complex_to_pair(w)] for t, w in self.sigma_samples],
            "values": [complex_to_pair(v) for v in self.values],
            "clearance": self.clearance,
            "detours": [d.to_json() for d in self.detours],
            "final_path": self.final_path.to_json(),
            "deformed": any(p is not self.base_path for p in self.paths),
        }


def _segment_frame(seg, x):
    """Arclength of the foot of ``x`` and its signed distance (left positive)."""
    e = seg.tangent()
    rel = (x - seg.start) * e.conjugate()
    return rel.real, rel.imag


class _Deformer:
    def __init__(self, eq, a, b, base, opts, detours):
        self.eq, self.a, self.b, self.base, self.opts = eq, a, b, base, opts
        self.mc = opts.min_clearance * base.length
        self.R = 2.0 * self.mc
        self.track_radius = 10.0 * self.mc
        self.detours = [Detour(**vars(d)) for d in (detours or [])]

    def discover(self, run, path):
        pts = singularities_near_path(run, self.eq, self.opts)
        return [x for x in pts if path.distance_to(x) <= self.track_radius]

    def update_detours(self, moved: dict[int, complex], tracked: list[complex]):
        """New detour list for the singular points ``tracked``; ``moved`` maps detour index to obstacle."""
        mc, R = self.mc, self.R
        out = []
        owners = set()
        for i, d in enumerate(self.detours):
            x = moved[i]
            owners.add(x)
            seg = self.base.segments[d.segment]
            tau, h = _segment_frame(seg, x)
            hp = d.side * h
            if hp < -2.0 * mc:
                continue
            if tau < R or tau > seg.length - R:
                raise DeformationFailed(f"singular point {x} slid to a vertex of the path")
            out.append(Detour(d.segment, tau, d.side, max(hp, 0.0), R, x))
        for x in tracked:
            if x in owners:
                continue
            for k, seg in enumerate(self.base.segments):
                if isinstance(seg, ArcSegment):
                    if seg.closest(x, 0.0, seg.length)[1] < mc:
                        raise DeformationFailed("singular point approaches an arc of the path")
                    continue
                tau, h = _segment_frame(seg, x)
                if not (-mc < tau < seg.length + mc) or abs(h) >= mc:
                    continue
                if tau < R or tau > seg.length - R:
                    raise DeformationFailed(f"singular point {x} approaches a vertex of the path")
                side = -1 if h > 0 else 1
                out.append(Detour(k, tau, side, 0.0, R, x))
        for x in tracked:
            for end in (self.a, self.b):
                if abs(x - end) < mc:
                    raise DeformationFailed(f"singular point {x} collides with endpoint {end}")
        for i, x in enumerate(tracked):
            for y in tracked[i + 1:]:
                if abs(x - y) < 4.0 * mc and min(self.base.distance_to(x), self.base.distance_to(y)) < 4.0 * mc:
                    raise DeformationFailed("two singular points pinch the path")
        for i, d in enumerate(out):
            for e in out[i + 1:]:
                if d.segment == e.segment and abs(d.foot - e.foot) < 2.0 * R + mc:
                    raise DeformationFailed("two detours pinch the path")
        return out


def _match_points(old: list[complex], new: list[complex], limit: float):
    """Nearest-neighbour match of ``old`` to ``new``; ``None`` entries for lost points."""
    out = []
    for x in old:
        best = min(new, key=lambda z: abs(z - x), default=None)
        out.append(best if best is not None and abs(best - x) <= limit else None)
    return out


def continue_poincare_along_sigma(eq, a, b, base_path: ComplexPath, sigma: ComplexPath,
                                  opts: ToleranceOptions | None = None,
                                  initial_detours: list[Detour] | None = None,
                                  max_steps: int = 4000):
    """Continue the germ of ``phi`` along the curve ``sigma`` of initial values.

    Each step first moves ``w`` along ``sigma`` with the path fixed, then
    re-locates the singular points near the path and deforms the path: a
    point closer than ``min_clearance * length`` to a line segment gets a
    U-shaped detour pushed to the far side, so the point is never crossed.
    A deformation must leave ``phi`` unchanged (``1e-8`` relative).

    Returns
    -------
    (PoincareGerm, DeformationTrace)
        The germ at ``sigma.end`` on the final path ``s_1``.

    Raises
    ------
    DeformationFailed
        Collision with an endpoint, pinching singular points, a singular
        point reaching a vertex or arc of the path, or step-size collapse.
    """
    opts = opts or DEFAULT_OPTIONS
    a, b = complex(a), complex(b)
    _check_ends(base_path, a, b)
    D = _Deformer(eq, a, b, base_path, opts, initial_detours)
    path = deformed_path(base_path, D.detours)
    w = complex(sigma.start)
    run = integrate_along_path(eq, w, path, opts, variational=True)
    if not run.reached:
        raise SingularOnPath("phi is singular at sigma(0)", record=run.singularity,
                             fixed_point=run.fixed_point)
    value, deriv = run.final_value, run.final_derivative
    tracked = D.discover(run, path)
    if D.detours:
        owners = _match_points([d.obstacle for d in D.detours], tracked, 0.5 * D.mc)
        if any(o is None for o in owners):
            raise DeformationFailed("initial detours do not match singular points of sigma(0)")
        moved = dict(enumerate(owners))
    else:
        moved = {}
    new_detours = D.update_detours(moved, tracked)
    if new_detours != D.detours:
        path2 = deformed_path(base_path, new_detours)
        run2 = integrate_along_path(eq, w, path2, opts, variational=True, keep_samples=False)
        if not run2.reached or abs(run2.final_value - value) > 1e-8 * (1.0 + abs(value)):
            raise DeformationFailed("initial deformation changes phi")
        D.detours, path, value, deriv = new_detours, path2, run2.final_value, run2.final_derivative

    def clearance_of(pts, p):
        return min((p.distance_to(x) for x in pts), default=math.inf)

    clearance = clearance_of(tracked, path)
    Ls = sigma.length
    t, dt = 0.0, 1.0 / 32.0
    samples, paths, values = [(0.0, w)], [path], [value]
    steps = 0
    while t < 1.0:
        steps += 1
        if steps > max_steps:
            raise DeformationFailed("too many sigma steps")
        if dt < 1e-7:
            raise DeformationFailed(f"sigma step collapsed at t = {t}")
        t1 = min(1.0, t + dt)
        w1 = sigma.point(t1 * Ls)
        # phase 1: move w with the path fixed
        run1 = integrate_along_path(eq, w1, path, opts, variational=True)
        if not run1.reached:
            dt /= 2.0
            continue
        pred = value + deriv * (w1 - w)
        if abs(run1.final_value - pred) > 1e-2 * (1.0 + abs(value)):
            dt /= 2.0
            continue
        found = D.discover(run1, path)
        matched = _match_points(tracked, found, 0.5 * D.mc)
        lost_close = any(m is None and path.distance_to(x) < 3.0 * D.mc
                         for x, m in zip(tracked, matched))
        obstacle_idx = {}
        for i, d in enumerate(D.detours):
            j = min(range(len(tracked)), key=lambda k: abs(tracked[k] - d.obstacle), default=None)
            obstacle_idx[i] = None if j is None else matched[j]
        if lost_close or any(v is None for v in obstacle_idx.values()):
            dt /= 2.0
            continue
        new_tracked = [m for m in matched if m is not None]
        for x in found:
            if all(abs(x - y) > 1e-6 * (1.0 + abs(y)) for y in new_tracked):
                new_tracked.append(x)
        # phase 2: deform the path with w fixed
        new_detours = D.update_detours(obstacle_idx, new_tracked)
        new_value, new_deriv, new_path = run1.final_value, run1.final_derivative, path
        if new_detours != D.detours:
            new_path = deformed_path(base_path, new_detours)
            run2 = integrate_along_path(eq, w1, new_path, opts, variational=True, keep_samples=False)
            if not run2.reached or abs(run2.final_value - run1.final_value) > 1e-8 * (1.0 + abs(run1.final_value)):
                dt /= 2.0
                continue
            new_value, new_deriv = run2.final_value, run2.final_derivative
        c = clearance_of(new_tracked, new_path)
        if c < D.mc:
            raise DeformationFailed(f"clearance {c:.3g} below min_clearance at t = {t1}")
        clearance = min(clearance, c)
        D.detours, path, tracked = new_detours, new_path, new_tracked
        t, w, value, deriv = t1, w1, new_value, new_deriv
        samples.append((t, w))
        paths.append(path)
        values.append(value)
        dt = min(1.5 * dt, 1.0 / 16.0)
        log.debug("sigma t=%.4f w=%s detours=%d", t, w, len(D.detours))
    germ = PoincareGerm(a, b, path, w, value, deriv)
    return germ, DeformationTrace(base_path, samples, paths, values, clearance, list(D.detours))


# ---------------------------------------------------------------------------
# the singular locus gamma
# ---------------------------------------------------------------------------


@dataclass
class SingularLocusSample:
    points: list[complex]
    parameter_along_s: list[float]

    def to_json(self) -> dict:
        return {"points": [complex_to_pair(p) for p in self.points],
                "parameter_along_s": list(self.parameter_along_s)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re_y_a", "im_y_a", "t"])
        for p, t in zip(self.points, self.parameter_along_s):
            w.writerow([repr(p.real), repr(p.imag), repr(t)])
        return buf.getvalue()


def _transverse(eq, path, x0):
    """``(t, h)``: foot parameter of ``x0`` on ``path`` and signed distance to the left."""
    t, _ = path.closest_point(x0)
    P, T = path.point(t), path.tangent(t)
    return t, ((x0 - P) * T.conjugate()).imag


def _nearest_singularity(eq, path, y_a, opts):
    run = integrate_along_path(eq, y_a, path, opts)
    if run.status is Status.HIT_MOVABLE:
        return run.singularity.location
    if not run.reached:
        return None
    pts = singularities_near_path(run, eq, opts)
    if not pts:
        return None
    return min(pts, key=path.distance_to)


def _locate_with_sensitivity(eq, path, y, x_guess, opts):
    ell = approach_scale(eq, x_guess, path)
    t_star, _ = path.closest_point(x_guess)
    t_c = approach_parameter(path, t_star, x_guess, ell)
    h = max(1e-6, 1e-6 * abs(y))
    x0 = singularity_from_path_point(eq, y, path, t_c, opts).location
    xp = singularity_from_path_point(eq, y + h, path, t_c, opts).location
    xm = singularity_from_path_point(eq, y - h, path, t_c, opts).location
    return x0, (xp - xm) / (2.0 * h)


def _refine_on_gamma(eq, path, y, x_guess, opts, max_iter=30):
    x0 = x_guess
    for _ in range(max_iter):
        x0, D = _locate_with_sensitivity(eq, path, y, x0, opts)
        t, h = _transverse(eq, path, x0)
        T = path.tangent(t)
        if abs(h) <= 1e-11 * (1.0 + abs(x0)):
            return y, x0, t
        if D == 0:
            return None
        y = y - h * 1j * T * D.conjugate() / abs(D) ** 2
    return None


def singular_locus_gamma(eq, a, b, path: ComplexPath, y_a_region, grid: int,
                         opts: ToleranceOptions | None = None) -> SingularLocusSample:
    """Sample the curve of initial values whose singular point lies on ``path``.

    ``y_a_region = (re_min, re_max, im_min, im_max)`` is scanned on a
    ``grid x grid`` lattice. On each node the singular point nearest the
    path is located and its signed distance to the path computed; sign
    changes along lattice edges are refined by Newton's method in the
    direction that moves the singular point across the path, using
    ``dx0/dy_a``. Every returned point is confirmed by a continuation that
    hits the singular point on the path.
    """
    opts = opts or DEFAULT_OPTIONS
    _check_ends(path, complex(a), complex(b))
    re0, re1, im0, im1 = (float(v) for v in y_a_region)
    if grid < 2 or not (re1 >= re0 and im1 >= im0):
        raise DomainError("region must be a nonempty rectangle and grid >= 2")
    L = path.length
    nodes = {}
    for i in range(grid):
        for j in range(grid):
            y = complex(re0 + (re1 - re0) * i / (grid - 1), im0 + (im1 - im0) * j / (grid - 1))
            x0 = _nearest_singularity(eq, path, y, opts)
            info = None
            if x0 is not None:
                t, h = _transverse(eq, path, x0)
                if 0.0 < t < L:
                    info = (y, x0, h)
            nodes[i, j] = info
    seeds = []
    for (i, j), info in nodes.items():
        if info is None:
            continue
        for nb in ((i + 1, j), (i, j + 1)):
            other = nodes.get(nb)
            if other is None:
                continue
            (y1, x1, h1), (y2, x2, h2) = info, other
            if h1 == 0:
                seeds.append((y1, x1))
            elif h1 * h2 < 0 and abs(x1 - x2) <= 0.5 * (1.0 + abs(x1)):
                lam = h1 / (h1 - h2)
                seeds.append((y1 + lam * (y2 - y1), x1 + lam * (x2 - x1)))
    points, params = [], []
    for y, xg in seeds:
        try:
            refined = _refine_on_gamma(eq, path, y, xg, opts)
        except (PerturbationEscaped, StepFailure, ArithmeticError) as exc:
            log.debug("gamma refinement failed from %s: %s", y, exc)
            continue
        if refined is None:
            continue
        y, x0, t = refined
        if not 0.0 < t < L:
            continue
        run = integrate_along_path(eq, y, path, opts, keep_samples=False)
        if run.status is not Status.HIT_MOVABLE or abs(run.singularity.location - path.point(t)) > 1e-6:
            continue
        if all(abs(y - p) > 1e-9 * (1.0 + abs(p)) for p in points):
            points.append(y)
            params.append(t)
    order = sorted(range(len(points)), key=lambda k: params[k])
    return SingularLocusSample([points[k] for k in order], [params[k] for k in order])


# ---------------------------------------------------------------------------
# branching of phi where the singular point reaches b
# ---------------------------------------------------------------------------


@dataclass
class BranchExponentFit:
    slope: float
    intercept: float
    residual: float
    y_a0: complex
    sensitivity: complex
    direction: complex
    epsilons: list[float]
    values: list[complex]

    def to_json(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual,
                "y_a0": complex_to_pair(self.y_a0), "sensitivity": complex_to_pair(self.sensitivity),
                "direction": complex_to_pair(self.direction), "epsilons": self.epsilons,
                "values": [complex_to_pair(v) for v in self.values]}


def refine_endpoint_hit(eq, path: ComplexPath, y_a0: complex, opts: ToleranceOptions | None = None,
                        tol: float = 1e-12):
    """Newton's method for the initial value whose singular point is ``path.end``.

    Returns ``(y_a0, dx0/dy_a)``.
    """
    opts = opts or DEFAULT_OPTIONS
    b = path.end
    y = complex(y_a0)
    x0 = b
    for _ in range(40):
        x0, D = _locate_with_sensitivity(eq, path, y, x0, opts)
        g = x0 - b
        if abs(g) <= tol * (1.0 + abs(b)):
            return y, D
        y = y - g / D
    if abs(x0 - b) <= 1e-9 * (1.0 + abs(b)):
        return y, D
    raise PerturbationEscaped(f"could not place the singular point on b (miss {abs(x0 - b):.3g})")


def poincare_branch_exponent_fit(eq, a, b, path: ComplexPath, y_a0: complex,
                                 opts: ToleranceOptions | None = None,
                                 epsilons=(1e-3, 1e-4, 1e-5)) -> BranchExponentFit:
    """Fit ``log|phi(y_a0 + eps e^{i theta})|`` against ``log eps``.

    ``theta`` is chosen so that the singular point moves beyond ``b`` along
    the path direction, which keeps the continuation regular.

    Raises
    ------
    FitRejected
        If the largest deviation from the fitted line exceeds 0.02.
    """
    opts = opts or DEFAULT_OPTIONS
    _check_ends(path, complex(a), complex(b))
    y0, D = refine_endpoint_hit(eq, path, y_a0, opts)
    T = path.tangent(path.length)
    direction = T * D.conjugate() / abs(D)
    direction /= abs(direction)
    values = [poincare_map(eq, a, b, path, y0 + eps * direction, opts).value for eps in epsilons]
    lx = np.log(np.asarray(epsilons, dtype=float))
    ly = np.log(np.abs(np.asarray(values)))
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    fit = BranchExponentFit(float(slope), float(intercept), residual, y0, D, direction,
                            list(epsilons), values)
    if residual > 0.02:
        raise FitRejected(f"log-log fit residual {residual:.3g} exceeds 0.02")
    return fit


def poincare_branch_exponent(eq, a, b, path, y_a0, opts=None) -> float:
    """Fitted exponent of ``phi`` at a point of ``gamma`` whose singular point is ``b``."""
    return poincare_branch_exponent_fit(eq, a, b, path, y_a0, opts).slope


def _x_of_u(eq, c, u_c, u, rtol):
    """Solve ``dx/du = -u/(p(x) u + q(x))`` from ``x(u_c) = c`` on the straight segment to ``u``."""
    from . import _rk

    p, q = eq.p, eq.q
    du = u - u_c

    def f(s, st):
        uu = u_c + s * du
        x = st[0]
        return (-uu / (p(x) * uu + q(x)) * du,)

    x = _rk.integrate(f, 0.0, 1.0, (complex(c),), rtol=rtol, atol=rtol)[0]
    return x, -u / (p(x) * u + q(x))


def circle_branch_point(eq, a, b, path: ComplexPath, y_a0: complex, radius: float = 1e-4,
                        turns: int = 2, steps_per_turn: int = 64,
                        opts: ToleranceOptions | None = None) -> list[complex]:
    """Continue ``phi`` along ``turns`` circles of ``radius`` around ``y_a0`` on ``gamma``.

    Near ``b`` the solution is followed in the uniformising variable ``u``:
    the path is integrated up to a point ``c`` well before ``b`` and the
    value at ``b`` is the root ``u_b`` of ``x(u) = b``, tracked by Newton's
    method as the initial value moves. Returns ``phi`` at the start and
    after each completed turn.
    """
    opts = opts or DEFAULT_OPTIONS
    a, b = complex(a), complex(b)
    _check_ends(path, a, b)
    y0, D = refine_endpoint_hit(eq, path, y_a0, opts)
    T = path.tangent(path.length)
    direction = T * D.conjugate() / abs(D)
    direction /= abs(direction)
    L = path.length
    ell = min(max(50.0 * abs(D) * radius, 1e-3), 0.25 * L)
    t_c = L - ell
    head = path.subpath(0.0, t_c)
    c = head.end
    rtol = opts.locate_rel_tol
    w = y0 + radius * direction
    u_b = 1.0 / poincare_map(eq, a, b, path, w, opts).value
    out = []
    n = turns * steps_per_turn
    theta0 = cmath.phase(direction)
    for k in range(n + 1):
        w = y0 + radius * cmath.exp(1j * (theta0 + 2.0 * math.pi * k / steps_per_turn))
        res = integrate_along_path(eq, w, head, opts, keep_samples=False)
        if not res.reached:
            raise SingularOnPath("continuation to the tracking point failed")
        u_c = 1.0 / res.final_value
        for _ in range(50):
            x, dx = _x_of_u(eq, c, u_c, u_b, rtol)
            step = (x - b) / dx
            u_b -= step
            if abs(step) <= 1e-14 * abs(u_b):
                break
        if k % steps_per_turn == 0:
            out.append(1.0 / u_b)
    return out
