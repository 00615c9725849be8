"""The exactly solvable model ``y' = c x y**3 + y**2``.

For ``c = (1 - delta**2)/4`` with ``delta = -1/(2n+1)`` the level curves of the
first integral

    H(x, y) = y (1 - x y / v1)**n / (1 - x y / v2)**(n+1)

are algebraic; in the chart ``u = 1/y`` a level ``H = y0`` reads
``(u - x/v1)**n = y0 (u - x/v2)**(n+1)``, a polynomial of full degree
``n + 1`` in ``u`` for every ``x``. The solution with ``y(0) = y0`` has a single
movable singularity at ``x0 = kappa / y0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .continuation import DEFAULT_OPTIONS, SingularityRecord, ToleranceOptions, integrate_along_path
from .core import (AbelEquation, ArcSegment, ComplexPath, ComplexPolynomial, LineSegment,
                   PuiseuxSeries, complex_to_pair, make_equation, newton_polish)
from .errors import BracketFailed, DegenerateC, DomainError, NoWitnessFound, PoleLocus, QuarterCase


@dataclass(frozen=True)
class LocalModelParams:
    """Exact parameters of the ``n``-family; rational fields are :class:`Fraction`."""

    n: int
    delta: Fraction
    c: Fraction
    v1: Fraction
    v2: Fraction
    beta: int
    gamma_exp: int
    kappa: Fraction

    def to_json(self) -> dict:
        out = {"n": self.n, "beta": self.beta, "gamma_exp": self.gamma_exp}
        for name in ("delta", "c", "v1", "v2", "kappa"):
            v = getattr(self, name)
            out[name] = float(v)
            out[name + "_exact"] = str(v)
        return out


def model_params(n: int) -> LocalModelParams:
    """Parameters of the model with ``delta = -1/(2n+1)``."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    n = int(n)
    delta = Fraction(-1, 2 * n + 1)
    c = (1 - delta * delta) / 4
    v1 = Fraction(-2) / (1 + delta)
    v2 = Fraction(-2) / (1 - delta)
    kappa = -v2 * (v2 / v1) ** n
    return LocalModelParams(n, delta, c, v1, v2, n, -(n + 1), kappa)


def model_equation(params: LocalModelParams) -> AbelEquation:
    """``y' = y**2 + c x y**3`` as an :class:`AbelEquation`."""
    return make_equation(ComplexPolynomial((1.0,)), ComplexPolynomial((0.0, float(params.c))))


@dataclass(frozen=True)
class RadicalParams:
    """Roots ``v1, v2`` of ``c v**2 + v + 1`` and the partial-fraction weights."""

    c: complex
    v1: complex
    v2: complex
    beta: complex
    gamma: complex
    swapped: bool = False


def params_from_c(c: complex, match_model: bool = False) -> RadicalParams:
    """Radical parameters for a general ``c``.

    ``v1 = (-1 + sqrt(1 - 4c)) / (2c)``, ``v2 = (-1 - sqrt(1 - 4c)) / (2c)``
    and ``1/(c v**3 + v**2 + v) = 1/v + beta/(v - v1) + gamma/(v - v2)``.
    With ``match_model`` the labels are exchanged when that makes ``beta``
    the positive one, which reproduces the labelling of :func:`model_params`.

    Raises
    ------
    DegenerateC
        ``c = 0``.
    QuarterCase
        ``c = 1/4``, where the two roots merge.
    """
    c = complex(c)
    if c == 0:
        raise DegenerateC("c = 0 gives a Riccati equation")
    disc = 1.0 - 4.0 * c
    if abs(disc) < 1e-14:
        raise QuarterCase("c = 1/4 has a double root; use quarter_case_cycles")
    s = cmath.sqrt(disc)
    v1 = (-1.0 + s) / (2.0 * c)
    v2 = (-1.0 - s) / (2.0 * c)
    beta = 1.0 / (c * v1 * (v1 - v2))
    gamma = 1.0 / (c * v2 * (v2 - v1))
    if match_model and beta.real < gamma.real:
        return RadicalParams(c, v2, v1, gamma, beta, True)
    return RadicalParams(c, v1, v2, beta, gamma, False)


def first_integral_H(params: LocalModelParams, x: complex, y: complex) -> complex:
    """``y (1 - x y / v1)**n / (1 - x y / v2)**(n+1)``.

    Raises
    ------
    PoleLocus
        On the hyperbola ``x y = v2`` (within ``1e-12``).
    """
    n = params.n
    xy = complex(x) * complex(y)
    den = 1.0 - xy / float(params.v2)
    if abs(den) <= 1e-12:
        raise PoleLocus("(x, y) lies on the pole hyperbola x y = v2")
    d = den ** (n + 1)
    if abs(d) < 1e-300:
        raise PoleLocus("denominator underflow")
    return complex(y) * (1.0 - xy / float(params.v1)) ** n / d


def model_residual(params: LocalModelParams, x: complex, y: complex, dy: complex) -> complex:
    """``y' - c x y**3 - y**2`` for a candidate value and derivative."""
    return dy - float(params.c) * x * y ** 3 - y * y


# ---------------------------------------------------------------------------
# branches of a level curve
# ---------------------------------------------------------------------------


def level_polynomial_u(params: LocalModelParams, y0: complex, x: complex) -> ComplexPolynomial:
    """``y0 (u - x/v2)**(n+1) - (u - x/v1)**n`` as a polynomial in ``u``."""
    x = complex(x)
    a = ComplexPolynomial((-x / float(params.v1), 1.0))
    b = ComplexPolynomial((-x / float(params.v2), 1.0))
    return (b ** (params.n + 1)) * complex(y0) - a ** params.n


def level_polynomial_y(params: LocalModelParams, y0: complex, x: complex) -> ComplexPolynomial:
    """``y (1 - x y / v1)**n - y0 (1 - x y / v2)**(n+1)`` as a polynomial in ``y``."""
    x = complex(x)
    a = ComplexPolynomial((1.0, -x / float(params.v1)))
    b = ComplexPolynomial((1.0, -x / float(params.v2)))
    return ComplexPolynomial((0.0, 1.0)) * a ** params.n - (b ** (params.n + 1)) * complex(y0)


def level_residual(params: LocalModelParams, y0: complex, x: complex, y: complex) -> float:
    n = params.n
    xy = x * y
    return abs(y * (1 - xy / float(params.v1)) ** n - y0 * (1 - xy / float(params.v2)) ** (n + 1))


def _u_roots(params, y0, x, polish=True):
    poly = level_polynomial_u(params, y0, x)
    coeffs = np.array(poly.coefficients[::-1], dtype=complex)
    roots = [complex(r) for r in np.roots(coeffs)]
    if not polish:
        return roots
    return [newton_polish(poly, r) if r != 0 else r for r in roots]


@dataclass
class BranchSet:
    """All ``n + 1`` points of the level curve ``H = y0`` above ``x``.

    ``u_roots`` are in the chart ``u = 1/y``; ``roots`` holds ``y = 1/u``
    with ``inf`` for the branches that escape to infinity (only at ``x = 0``).
    """

    x: complex
    y0: complex
    u_roots: list[complex]
    labels: list[int]
    discriminant_zero: bool = False

    @property
    def roots(self) -> list[complex]:
        return [1.0 / u if u != 0 else complex(math.inf, 0.0) for u in self.u_roots]

    @property
    def escaping(self) -> int:
        return sum(1 for u in self.u_roots if u == 0)

    def to_json(self) -> dict:
        return {
            "x": complex_to_pair(self.x),
            "y0": complex_to_pair(self.y0),
            "u_roots": [complex_to_pair(u) for u in self.u_roots],
            "labels": list(self.labels),
            "escaping": self.escaping,
            "discriminant_zero": self.discriminant_zero,
        }


def branches_at(params: LocalModelParams, y0: complex, x: complex) -> BranchSet:
    """Points of ``H = y0`` above ``x``, ordered by ``(Re u, Im u)``."""
    y0 = complex(y0)
    if y0 == 0:
        raise DomainError("y0 must be nonzero")
    roots = sorted(_u_roots(params, y0, complex(x)), key=lambda z: (z.real, z.imag))
    gap = min((abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]), default=math.inf)
    return BranchSet(complex(x), y0, roots, list(range(len(roots))), gap < 1e-8)


def movable_singularity(params: LocalModelParams, y0: complex) -> SingularityRecord:
    """The singular point ``kappa / y0`` of the solution with ``y(0) = y0``."""
    y0 = complex(y0)
    if y0 == 0:
        raise DomainError("y0 must be nonzero")
    x0 = float(params.kappa) / y0
    a0 = -1.0 / (2.0 * float(params.c) * x0)
    return SingularityRecord(location=x0, kind="movable", ramification_order=2, leading_coefficient=a0)


def puiseux_at_origin(params: LocalModelParams, y0: complex) -> PuiseuxSeries:
    """Two-term expansion ``u = x / v1 + mu x**(1 + 1/n)`` of the infinite branches at 0.

    ``mu = y0**(1/n) (-delta)**(1 + 1/n)`` on principal branches; the other
    infinite branches follow from ``mu`` times an ``n``-th root of unity, i.e.
    from the sheets of :meth:`PuiseuxSeries.evaluate`.
    """
    y0 = complex(y0)
    if y0 == 0:
        raise DomainError("y0 must be nonzero")
    n = params.n
    mu = y0 ** (1.0 / n) * float(-params.delta) ** (1.0 + 1.0 / n)
    coeffs = [1.0 / float(params.v1)] + [0.0] * (n - 1) + [mu]
    return PuiseuxSeries(0j, n, Fraction(1), tuple(coeffs))


# ---------------------------------------------------------------------------
# limit cycles
# ---------------------------------------------------------------------------


def limit_cycle_polynomial(n: int, b: complex) -> ComplexPolynomial:
    """``((1 - b y/v1)**n - (1 - b y/v2)**(n+1)) / y`` as a polynomial in ``y``."""
    params = model_params(n)
    b = complex(b)
    a = ComplexPolynomial((1.0, -b / float(params.v1)))
    c = ComplexPolynomial((1.0, -b / float(params.v2)))
    full = a ** n - c ** (n + 1)
    return ComplexPolynomial(full.coefficients[1:])


def limit_cycle_roots(n: int, b: complex) -> list[complex]:
    """The ``n`` nonzero initial values ``y0`` with ``H(b, y0) = y0``."""
    if complex(b) == 0:
        raise DomainError("b must be nonzero")
    return limit_cycle_polynomial(n, b).roots()


@dataclass
class CycleWitness:
    """A path from 0 to ``b`` along which the solution returns to ``y0``."""

    y0: complex
    b: complex
    path: ComplexPath
    m: int
    omega_direction: int
    turn_direction: int
    y_b: complex

    def to_json(self) -> dict:
        return {
            "y0": complex_to_pair(self.y0),
            "b": complex_to_pair(self.b),
            "m": self.m,
            "omega_direction": self.omega_direction,
            "turn_direction": self.turn_direction,
            "y_b": complex_to_pair(self.y_b),
            "path": self.path.to_json(),
        }


def witness_path(x0: complex, b: complex, m: int, omega: int, turn: int) -> ComplexPath:
    """Out towards ``x0``, ``omega`` loops around it, back near 0, ``m`` turns there, on to ``b``.

    ``omega = 0`` skips the loop around ``x0``; ``turn`` is the orientation
    of the turns around 0.
    """
    x0, b = complex(x0), complex(b)
    r = 0.25 * min(abs(x0), abs(x0 - b))
    rho = 0.25 * min(abs(x0), abs(b), r)
    ang0 = cmath.phase(x0)
    angb = cmath.phase(b)
    segs: list = []
    start = rho * cmath.exp(1j * ang0)
    if omega:
        near = x0 - r * x0 / abs(x0)
        segs.append(LineSegment(0j, near))
        seg = ArcSegment(x0, r, ang0 + math.pi, ang0 + math.pi + 2.0 * math.pi * omega)
        segs.append(seg)
        segs.append(LineSegment(seg.end, start))
    else:
        segs.append(LineSegment(0j, start))
    # turns around 0, then the shorter arc to the direction of b
    delta = (angb - ang0 + math.pi) % (2.0 * math.pi) - math.pi
    sweep = 2.0 * math.pi * m * turn + delta
    if sweep != 0:
        segs.append(ArcSegment(0j, rho, ang0, ang0 + sweep))
    segs.append(LineSegment(segs[-1].end, b))
    return ComplexPath(tuple(segs))


def verify_limit_cycle(params: LocalModelParams, y0_root: complex, b: complex,
                       opts: ToleranceOptions | None = None) -> CycleWitness:
    """Find a witness path on which the solution from ``(0, y0_root)`` returns to ``y0_root`` at ``b``.

    Searches ``m = 0..n`` turns around the origin in both orientations,
    after one loop around the movable singularity in either orientation,
    and finally without that loop.

    Raises
    ------
    NoWitnessFound
        If no candidate closes the orbit to ``1e-7 (1 + |y0|)``.
    """
    opts = opts or ToleranceOptions(rel_tol=1e-12)
    y0, b = complex(y0_root), complex(b)
    eq = model_equation(params)
    x0 = movable_singularity(params, y0).location
    tol = 1e-7 * (1.0 + abs(y0))
    candidates = []
    for omega in (1, -1, 0):
        for m in range(params.n + 1):
            for turn in ((1, -1) if m else (1,)):
                candidates.append((m, omega, turn))
    best = math.inf
    for m, omega, turn in candidates:
        path = witness_path(x0, b, m, omega, turn)
        res = integrate_along_path(eq, y0, path, opts, keep_samples=False)
        if not res.reached:
            continue
        err = abs(res.final_value - y0)
        best = min(best, err)
        if err <= tol:
            return CycleWitness(y0, b, path, m, omega, turn, res.final_value)
    raise NoWitnessFound(f"no witness closes the orbit of y0 = {y0} (best mismatch {best:.3g})")


# ---------------------------------------------------------------------------
# c = 1/4
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuarterCycle:
    index: int
    y: float
    xi: complex
    y_cycle: complex

    @property
    def conjugate_xi(self) -> complex:
        return self.xi.conjugate()

    def to_json(self) -> dict:
        return {"index": self.index, "y": self.y, "xi": complex_to_pair(self.xi),
                "xi_conjugate": complex_to_pair(self.conjugate_xi),
                "y_cycle": complex_to_pair(self.y_cycle)}


def quarter_F(y: float) -> float:
    """``1 + log(-sin y / y) + y / tan y``; zeros give roots of ``1 - xi = exp(xi)``."""
    return 1.0 + math.log(-math.sin(y) / y) + y / math.tan(y)


def quarter_case_cycles(k: int) -> list[QuarterCycle]:
    """First ``k`` nontrivial roots of ``1 - xi = exp(xi)`` in the upper half plane.

    One root per interval ``((2j+1) pi, (2j+2) pi)`` for the imaginary part;
    each is polished by Newton's method on ``1 - xi - exp(xi)``.

    Raises
    ------
    BracketFailed
        If no sign change of :func:`quarter_F` is found on an interval.
    """
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    out = []
    for j in range(int(k)):
        lo_end, hi_end = (2 * j + 1) * math.pi, (2 * j + 2) * math.pi
        eps = 1e-2
        while True:
            lo, hi = lo_end + eps, hi_end - eps
            if quarter_F(lo) > 0 > quarter_F(hi):
                break
            eps /= 10.0
            if eps < 1e-12:
                raise BracketFailed(f"no sign change of F on interval {j}")
        y = brentq(quarter_F, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        xi = complex(-math.log(-math.sin(y) / y), y)
        for _ in range(20):
            g = 1.0 - xi - cmath.exp(xi)
            step = g / (-1.0 - cmath.exp(xi))
            xi -= step
            if abs(step) < 1e-16 * abs(xi):
                break
        out.append(QuarterCycle(j, y, xi, 2.0 * xi / (1.0 - xi)))
    return out


# ---------------------------------------------------------------------------
# composition lift
# ---------------------------------------------------------------------------


@dataclass
class CompositionLift:
    """``y' = p(x) y**2 + c P(x) p(x) y**3`` with ``P' = p``, ``P(0) = 0``.

    Every solution is ``y(x) = Y(P(x))`` for a solution ``Y`` of
    ``dY/dw = c w Y**3 + Y**2``, so ``phi`` is the identity between points
    with equal ``P``.
    """

    equation: AbelEquation
    P: ComplexPolynomial
    base_c: float
    statement: str = field(default="solutions satisfy y(x) = Y(P(x)) with dY/dw = c w Y^3 + Y^2")

    def first_integral(self, x: complex, y: complex) -> complex:
        """``y (1 - P y / v1)**beta (1 - P y / v2)**gamma`` with radical parameters."""
        rp = params_from_c(self.base_c)
        w = self.P(x) * complex(y)
        return complex(y) * (1.0 - w / rp.v1) ** rp.beta * (1.0 - w / rp.v2) ** rp.gamma

    def to_json(self) -> dict:
        return {"equation": self.equation.to_json(), "P": self.P.to_json(),
                "base_c": self.base_c, "statement": self.statement}


def composition_lift(base_c: float, p_poly: ComplexPolynomial) -> CompositionLift:
    """Lift the model with parameter ``base_c`` through ``w = P(x)``, ``P = int_0^x p``."""
    p_poly = p_poly if isinstance(p_poly, ComplexPolynomial) else ComplexPolynomial(tuple(p_poly))
    if p_poly.is_zero:
        raise DomainError("p_poly must be nonzero")
    P = p_poly.antiderivative()
    q = P * p_poly * complex(base_c)
    return CompositionLift(make_equation(p_poly, q), P, base_c)
