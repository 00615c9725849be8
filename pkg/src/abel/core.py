"""Complex polynomials, Abel equations, piecewise paths and Puiseux series.

Everything here is immutable after construction. Paths are parametrized by
arclength ``t`` running from ``0`` to ``path.length``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateEquation, DiscontinuousPath, InvalidPolynomial

ROOT_TOLERANCE = 1e-10
CONTINUITY_TOLERANCE = 1e-12
TWO_PI = 2.0 * math.pi


def as_complex(value) -> complex:
    """Coerce ``value`` (number, ``[re, im]`` pair or ``"re,im"`` string)."""
    if isinstance(value, str):
        parts = value.replace(" ", "").split(",")
        if len(parts) == 1:
            return complex(parts[0].replace("i", "j"))
        if len(parts) != 2:
            raise ValueError(f"cannot parse complex number from {value!r}")
        return complex(float(parts[0]), float(parts[1]))
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"expected [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def complex_to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial with complex coefficients stored in ascending degree.

    Trailing zeros are stripped, so ``coefficients[-1] != 0`` unless the
    polynomial is identically zero (then ``coefficients == ()``).
    """

    coefficients: tuple[complex, ...] = ()

    def __post_init__(self):
        coeffs = []
        for c in self.coefficients:
            try:
                z = as_complex(c)
            except (TypeError, ValueError) as exc:
                raise InvalidPolynomial(f"bad coefficient {c!r}") from exc
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise InvalidPolynomial(f"non-finite coefficient {c!r}")
            coeffs.append(z)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def from_roots(cls, roots: Iterable[complex], leading: complex = 1.0):
        poly = cls((leading,))
        for r in roots:
            poly = poly * cls((-complex(r), 1.0))
        return poly

    @property
    def degree(self) -> int:
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def norm(self) -> float:
        """Sum of the moduli of the coefficients."""
        return math.fsum(abs(c) for c in self.coefficients)

    def __call__(self, x: complex) -> complex:
        acc = 0j
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def eval_with_derivative(self, x: complex) -> tuple[complex, complex]:
        val = 0j
        der = 0j
        for c in reversed(self.coefficients):
            der = der * x + val
            val = val * x + c
        return val, der

    def derivative(self) -> "ComplexPolynomial":
        return ComplexPolynomial(tuple(k * c for k, c in enumerate(self.coefficients) if k))

    def antiderivative(self) -> "ComplexPolynomial":
        """Antiderivative vanishing at ``x = 0``."""
        return ComplexPolynomial((0j,) + tuple(c / (k + 1) for k, c in enumerate(self.coefficients)))

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coefficients), len(other.coefficients))
        a = self.coefficients + (0j,) * (n - len(self.coefficients))
        b = other.coefficients + (0j,) * (n - len(other.coefficients))
        return ComplexPolynomial(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return ComplexPolynomial(tuple(-c for c in self.coefficients))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return ComplexPolynomial(())
        out = [0j] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return ComplexPolynomial(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = ComplexPolynomial((1.0,))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def compose(self, inner: "ComplexPolynomial") -> "ComplexPolynomial":
        acc = ComplexPolynomial(())
        for c in reversed(self.coefficients):
            acc = acc * inner + c
        return acc

    def roots(self, polish: bool = True) -> list[complex]:
        """All roots with multiplicity: companion eigenvalues, then Newton."""
        if self.degree < 1:
            return []
        raw = np.roots(np.array(self.coefficients[::-1], dtype=complex))
        roots = [complex(r) for r in raw]
        if polish:
            roots = [newton_polish(self, r) for r in roots]
        return sorted(roots, key=lambda z: (round(z.real, 12), round(z.imag, 12)))

    def to_json(self) -> list[list[float]]:
        return [complex_to_pair(c) for c in self.coefficients]

    @classmethod
    def from_json(cls, data) -> "ComplexPolynomial":
        if isinstance(data, dict):
            data = data.get("coefficients", [])
        return cls(tuple(as_complex(c) for c in data))


def _as_poly(value) -> ComplexPolynomial:
    if isinstance(value, ComplexPolynomial):
        return value
    return ComplexPolynomial((complex(value),))


def newton_polish(poly: ComplexPolynomial, z: complex, max_iter: int = 60) -> complex:
    """Newton iteration that only keeps steps which reduce the residual."""
    best = z
    best_res = abs(poly(z))
    stalled = 0
    for _ in range(max_iter):
        val, der = poly.eval_with_derivative(z)
        if der == 0 or val == 0:
            break
        step = val / der
        z = z - step
        res = abs(poly(z))
        if res < best_res:
            best, best_res = z, res
            stalled = 0
        else:
            stalled += 1
            if stalled >= 3:
                break
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return best


# ---------------------------------------------------------------------------
# equations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbelEquation:
    """``y' = p(x) y**2 + q(x) y**3`` with polynomial coefficients."""

    p: ComplexPolynomial
    q: ComplexPolynomial
    m: int
    K: float
    fixed_singularities: tuple[complex, ...]

    def rhs(self, x: complex, y: complex) -> complex:
        y2 = y * y
        return self.p(x) * y2 + self.q(x) * y2 * y

    def root_residual_bound(self, x: complex) -> float:
        return ROOT_TOLERANCE * self.K * max(1.0, abs(x)) ** self.m

    def nearest_fixed_singularity(self, x: complex) -> tuple[complex | None, float]:
        best, dist = None, math.inf
        for r in self.fixed_singularities:
            d = abs(x - r)
            if d < dist:
                best, dist = r, d
        return best, dist

    def to_json(self) -> dict:
        return {"p": self.p.to_json(), "q": self.q.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "AbelEquation":
        return make_equation(ComplexPolynomial.from_json(data["p"]),
                             ComplexPolynomial.from_json(data["q"]))


def make_equation(p, q) -> AbelEquation:
    """Build and validate an Abel equation from its two coefficient polynomials.

    Raises
    ------
    DegenerateEquation
        If ``q`` is identically zero (the equation degenerates to Riccati).
    InvalidPolynomial
        If a coefficient is not a finite complex number.
    """
    p = p if isinstance(p, ComplexPolynomial) else ComplexPolynomial(tuple(p))
    q = q if isinstance(q, ComplexPolynomial) else ComplexPolynomial(tuple(q))
    if q.is_zero:
        raise DegenerateEquation("q must not vanish identically")
    m = max(p.degree, q.degree, 0)
    K = max(p.norm(), q.norm())
    roots = tuple(q.roots())
    eq = AbelEquation(p=p, q=q, m=m, K=K, fixed_singularities=roots)
    for r in roots:
        if abs(q(r)) > eq.root_residual_bound(r):
            raise InvalidPolynomial(f"root finder did not converge for q at {r}")
    return eq


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineSegment:
    start: complex
    end: complex

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def point(self, s: float) -> complex:
        L = self.length
        if L == 0:
            return self.start
        return self.start + (self.end - self.start) * (s / L)

    def tangent(self, s: float = 0.0) -> complex:
        L = self.length
        return (self.end - self.start) / L if L else 1.0 + 0j

    def closest(self, x: complex, s0: float, s1: float) -> tuple[float, float]:
        e = self.tangent()
        s = ((x - self.start) * e.conjugate()).real
        s = min(max(s, s0), s1)
        return s, abs(x - self.point(s))

    def reversed(self) -> "LineSegment":
        return LineSegment(self.end, self.start)

    def conjugate(self) -> "LineSegment":
        return LineSegment(self.start.conjugate(), self.end.conjugate())

    def to_json(self) -> dict:
        return {"type": "line", "from": complex_to_pair(self.start), "to": complex_to_pair(self.end)}


@dataclass(frozen=True)
class ArcSegment:
    """Circular arc; ``to_angle < from_angle`` means clockwise."""

    center: complex
    radius: float
    from_angle: float
    to_angle: float

    @property
    def sweep(self) -> float:
        return self.to_angle - self.from_angle

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    @property
    def start(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * self.from_angle)

    @property
    def end(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * self.to_angle)

    def _angle(self, s: float) -> float:
        L = self.length
        if L == 0:
            return self.from_angle
        return self.from_angle + self.sweep * (s / L)

    def point(self, s: float) -> complex:
        return self.center + self.radius * cmath.exp(1j * self._angle(s))

    def tangent(self, s: float = 0.0) -> complex:
        direction = 1.0 if self.sweep >= 0 else -1.0
        return 1j * direction * cmath.exp(1j * self._angle(s))

    def closest(self, x: complex, s0: float, s1: float) -> tuple[float, float]:
        candidates = [s0, s1]
        if self.radius > 0 and x != self.center and self.sweep != 0:
            target = cmath.phase(x - self.center)
            lo = min(self._angle(s0), self._angle(s1))
            hi = max(self._angle(s0), self._angle(s1))
            k = math.ceil((lo - target) / TWO_PI)
            theta = target + k * TWO_PI
            while theta <= hi:
                candidates.append((theta - self.from_angle) / self.sweep * self.length)
                theta += TWO_PI
        best_s, best_d = s0, math.inf
        for s in sorted(candidates):
            d = abs(x - self.point(s))
            if d < best_d - 1e-15:
                best_s, best_d = s, d
        return best_s, best_d

    def reversed(self) -> "ArcSegment":
        return ArcSegment(self.center, self.radius, self.to_angle, self.from_angle)

    def conjugate(self) -> "ArcSegment":
        return ArcSegment(self.center.conjugate(), self.radius, -self.from_angle, -self.to_angle)

    def to_json(self) -> dict:
        return {
            "type": "arc",
            "center": complex_to_pair(self.center),
            "radius": self.radius,
            "from_angle": self.from_angle,
            "to_angle": self.to_angle,
        }


Segment = LineSegment | ArcSegment


@dataclass(frozen=True)
class ComplexPath:
    """Continuous chain of line segments and circular arcs."""

    segments: tuple[Segment, ...]
    offsets: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("a path needs at least one segment")
        for k in range(len(segs) - 1):
            a, b = segs[k].end, segs[k + 1].start
            if abs(a - b) > CONTINUITY_TOLERANCE * max(1.0, abs(a)):
                raise DiscontinuousPath(
                    f"segment {k} ends at {a} but segment {k + 1} starts at {b}")
        offsets = [0.0]
        for s in segs:
            offsets.append(offsets[-1] + s.length)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "offsets", tuple(offsets))

    @property
    def length(self) -> float:
        return self.offsets[-1]

    @property
    def start(self) -> complex:
        return self.segments[0].start

    @property
    def end(self) -> complex:
        return self.segments[-1].end

    def locate(self, t: float) -> tuple[int, float]:
        """Segment index and local arclength for global parameter ``t``."""
        t = min(max(t, 0.0), self.length)
        for k, seg in enumerate(self.segments):
            if t <= self.offsets[k + 1] or k == len(self.segments) - 1:
                return k, min(t - self.offsets[k], seg.length)
        raise AssertionError("unreachable")

    def point(self, t: float) -> complex:
        k, s = self.locate(t)
        return self.segments[k].point(s)

    def tangent(self, t: float) -> complex:
        k, s = self.locate(t)
        return self.segments[k].tangent(s)

    def closest_point(self, x: complex, t_min: float = 0.0, t_max: float | None = None):
        """Return ``(t, distance)`` of the point of ``path[t_min, t_max]`` nearest ``x``.

        Ties are broken towards the smallest ``t``.
        """
        if t_max is None:
            t_max = self.length
        best_t, best_d = t_min, abs(x - self.point(t_min))
        for k, seg in enumerate(self.segments):
            a, b = self.offsets[k], self.offsets[k + 1]
            lo, hi = max(a, t_min), min(b, t_max)
            if lo > hi:
                continue
            s, d = seg.closest(x, lo - a, hi - a)
            if d < best_d - 1e-15:
                best_t, best_d = a + s, d
        return best_t, best_d

    def distance_to(self, x: complex) -> float:
        return self.closest_point(x)[1]

    def reversed(self) -> "ComplexPath":
        return ComplexPath(tuple(s.reversed() for s in reversed(self.segments)))

    def conjugate(self) -> "ComplexPath":
        return ComplexPath(tuple(s.conjugate() for s in self.segments))

    def __add__(self, other: "ComplexPath") -> "ComplexPath":
        return ComplexPath(self.segments + other.segments)

    def subpath(self, t0: float, t1: float) -> "ComplexPath":
        """Restriction to ``[t0, t1]`` (``t0 < t1``)."""
        segs = []
        for k, seg in enumerate(self.segments):
            a, b = self.offsets[k], self.offsets[k + 1]
            lo, hi = max(a, t0), min(b, t1)
            if hi <= lo and not (seg.length == 0 and a == t0):
                continue
            if isinstance(seg, LineSegment):
                segs.append(LineSegment(seg.point(lo - a), seg.point(hi - a)))
            else:
                segs.append(ArcSegment(seg.center, seg.radius, seg._angle(lo - a), seg._angle(hi - a)))
        return ComplexPath(tuple(segs))

    def sample(self, n: int) -> list[complex]:
        return [self.point(self.length * k / n) for k in range(n + 1)]

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.segments]

    @classmethod
    def from_json(cls, data) -> "ComplexPath":
        if isinstance(data, dict):
            data = data["segments"]
        return make_path(data)


def make_path(items: Sequence) -> ComplexPath:
    """Build a validated path from segment objects or JSON-style descriptors.

    Raises
    ------
    DiscontinuousPath
        If consecutive segments do not join up.
    """
    segments = []
    for item in items:
        if isinstance(item, (LineSegment, ArcSegment)):
            segments.append(item)
            continue
        kind = item.get("type")
        if kind == "line":
            segments.append(LineSegment(as_complex(item["from"]), as_complex(item["to"])))
        elif kind == "arc":
            radius = float(item["radius"])
            if radius < 0:
                raise ValueError("arc radius must be nonnegative")
            segments.append(ArcSegment(as_complex(item["center"]), radius,
                                       float(item["from_angle"]), float(item["to_angle"])))
        else:
            raise ValueError(f"unknown segment type {kind!r}")
    return ComplexPath(tuple(segments))


def line(a: complex, b: complex) -> ComplexPath:
    return ComplexPath((LineSegment(complex(a), complex(b)),))


def polyline(points: Sequence[complex]) -> ComplexPath:
    pts = [complex(p) for p in points]
    return ComplexPath(tuple(LineSegment(pts[k], pts[k + 1]) for k in range(len(pts) - 1)))


def circle(center: complex, start: complex, turns: float = 1.0) -> ComplexPath:
    """Loop around ``center`` through ``start``; negative ``turns`` is clockwise."""
    center, start = complex(center), complex(start)
    theta = cmath.phase(start - center)
    return ComplexPath((ArcSegment(center, abs(start - center), theta, theta + TWO_PI * turns),))


def keyhole_loop(base: complex, center: complex, radius: float, turns: int = 1) -> ComplexPath:
    """Straight in from ``base``, ``turns`` loops around ``center``, straight back."""
    base, center = complex(base), complex(center)
    direction = (base - center) / abs(base - center)
    touch = center + radius * direction
    return line(base, touch) + circle(center, touch, turns) + line(touch, base)


# ---------------------------------------------------------------------------
# Puiseux series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PuiseuxSeries:
    """``sum_k coefficients[k] * (x - base_point) ** (leading_exponent + k / denominator)``.

    The fractional power is taken on sheet ``sheet`` of the principal
    ``denominator``-th root, i.e. multiplied by ``exp(2 pi i sheet / d)``.
    """

    base_point: complex
    denominator: int
    leading_exponent: Fraction
    coefficients: tuple[complex, ...]

    def __post_init__(self):
        if self.denominator < 1:
            raise ValueError("denominator must be positive")
        lead = Fraction(self.leading_exponent)
        if (lead * self.denominator).denominator != 1:
            raise ValueError("leading exponent must be a multiple of 1/denominator")
        if not self.coefficients or self.coefficients[0] == 0:
            raise ValueError("first coefficient must be nonzero")
        object.__setattr__(self, "leading_exponent", lead)
        object.__setattr__(self, "coefficients", tuple(complex(c) for c in self.coefficients))

    def exponents(self) -> list[Fraction]:
        return [self.leading_exponent + Fraction(k, self.denominator) for k in range(len(self.coefficients))]

    def root(self, x: complex, sheet: int = 0) -> complex:
        d = self.denominator
        return (complex(x) - self.base_point) ** (1.0 / d) * cmath.exp(2j * math.pi * sheet / d)

    def evaluate(self, x: complex, sheet: int = 0) -> complex:
        t = self.root(x, sheet)
        lead = int(self.leading_exponent * self.denominator)
        acc = 0j
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc * t ** lead

    def to_json(self) -> dict:
        return {
            "base_point": complex_to_pair(self.base_point),
            "denominator": self.denominator,
            "leading_exponent": str(self.leading_exponent),
            "coefficients": [complex_to_pair(c) for c in self.coefficients],
        }
