"""Explicit regularity radius and majorant for solutions of the Abel equation.

Along a ray ``x(t) = a + t v`` the modulus of a solution obeys
``d|y|/dt <= K w(t) (|y|**2 + |y|**3)`` where ``w`` bounds ``|x|**m``-type
growth of the coefficients. Comparing with the separable scalar equation and
bracketing its implicit integral ``F`` by the piecewise ``H`` gives the
majorant ``yhat(t) = (-(H(|y_a|) + S(t)))**-1/2`` and its blow-up time ``rho``.

For a polynomial of norm ``K`` and degree ``<= m`` the sound pointwise bound
is ``|p(x)| <= K max(1, |x|)**m``; so ``S(t) = K * int_0^t max(1, |a| + s)**m ds``.
When ``|a| >= 1`` this is ``K/(m+1) ((|a|+t)**(m+1) - |a|**(m+1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import AbelEquation
from .errors import DomainError


@dataclass(frozen=True)
class BoundParams:
    abs_a: float
    abs_ya: float
    K: float
    m: int

    def __post_init__(self):
        for name in ("abs_a", "abs_ya", "K"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and nonnegative, got {v}")
        if self.K <= 0:
            raise DomainError("K must be positive")
        if int(self.m) != self.m or self.m < 0:
            raise DomainError("m must be a nonnegative integer")


@dataclass(frozen=True)
class SingularityScaleParams:
    """Scales of the neighbourhood of a movable singularity ``x0``."""

    x0: complex
    eta: float
    R: float
    r: float
    M: float
    delta: float
    c_scale: float


def comparison_F(y: float) -> float:
    """``ln(1 + 1/y) - 1/y``, the implicit integral of the comparison equation."""
    if not y > 0:
        raise DomainError("comparison_F needs y > 0")
    return math.log1p(1.0 / y) - 1.0 / y


def comparison_H(y: float) -> float:
    """Piecewise upper bound for :func:`comparison_F`; continuous at ``y = 1``."""
    if not y > 0:
        raise DomainError("comparison_H needs y > 0")
    if y >= 1.0:
        return -1.0 / (4.0 * y * y)
    return -1.0 / (2.0 * y) + 0.25


def growth_integral(abs_a: float, K: float, m: int, t: float) -> float:
    """``K * int_0^t max(1, |a| + s)**m ds``."""
    if t <= 0:
        return 0.0
    flat = max(0.0, min(t, 1.0 - abs_a))  # portion of the ray inside the unit disk
    start = max(1.0, abs_a)
    stop = abs_a + t
    curved = 0.0
    if stop > start:
        curved = (stop ** (m + 1) - start ** (m + 1)) / (m + 1)
    return K * (flat + curved)


def regularity_radius(params: BoundParams) -> float:
    """Radius of a disk around ``a`` on which the solution is guaranteed regular.

    Solves ``S(rho) = -H(|y_a|)``. For ``|a| >= 1`` this is
    ``|a| ((1 - (m+1) H / (K |a|**(m+1)))**(1/(m+1)) - 1)``, evaluated through
    ``expm1``/``log1p`` to avoid cancellation. Returns ``inf`` for ``y_a = 0``.
    """
    if params.abs_ya == 0:
        return math.inf
    target = -comparison_H(params.abs_ya)
    a, K, m = params.abs_a, params.K, params.m
    if a < 1.0:
        flat_budget = K * (1.0 - a)
        if target <= flat_budget:
            return target / K
        rest = target - flat_budget
        return (1.0 + (m + 1) * rest / K) ** (1.0 / (m + 1)) - a
    z = (m + 1) * target / (K * a ** (m + 1))
    return a * math.expm1(math.log1p(z) / (m + 1))


def solution_majorant(params: BoundParams, t: float) -> float:
    """``yhat(t)``: bound on ``|y|`` at distance ``t`` from ``a``; ``inf`` past ``rho``."""
    if t < 0 or not math.isfinite(t):
        raise DomainError("t must be finite and nonnegative")
    if params.abs_ya == 0:
        return 0.0
    h = comparison_H(params.abs_ya)
    bracket = -(h + growth_integral(params.abs_a, params.K, params.m, t))
    if bracket <= 1e-14 * abs(h):
        return math.inf
    return bracket ** -0.5


def safe_disk_radius_at_origin(abs_ya: float, K: float, m: int) -> float:
    """Radius ``R`` with every solution of modulus ``abs_ya`` at ``|a| <= R/2`` regular on ``D_R``.

    Starts from the small-``|y_a|`` growth law ``(1/(2 K |y_a|))**(1/(m+1))``
    and shrinks it by bisection until the disk ``D_R`` sits inside the
    regularity disk of every admissible ``a``.
    """
    if not (abs_ya > 0 and K > 0) or m < 0:
        raise DomainError("safe_disk_radius_at_origin needs abs_ya > 0, K > 0, m >= 0")

    def sound(R: float) -> bool:
        # D_R(0) is inside D_rho(a) for |a| <= R/2 iff rho(R/2) >= 3R/2; rho decreases in |a|
        return regularity_radius(BoundParams(R / 2.0, abs_ya, K, m)) >= 1.5 * R

    # leading constant makes the test sharp in the small-|y_a| limit
    theta = ((m + 1) / (2.0 ** (m + 1) - 2.0 ** -(m + 1))) ** (1.0 / (m + 1))
    R = 0.99 * theta * (1.0 / (2.0 * K * abs_ya)) ** (1.0 / (m + 1))
    if sound(R):
        return R
    lo, hi = 0.0, R
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sound(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return lo


def singularity_scale(eq: AbelEquation, x0: complex) -> SingularityScaleParams:
    """Neighbourhood scales around a prospective movable singularity ``x0``.

    ``m`` is taken as at least 1 so the formulas stay finite for constant ``q``.
    """
    eta = abs(eq.q(x0))
    if eta == 0:
        raise DomainError("x0 is a fixed singularity")
    m = max(eq.m, 1)
    K = eq.K
    R = 2.0 * (abs(x0) + 1.0)
    r = min(R / 4.0, eta / (2.0 * m * (K + 1.0) * R ** (m - 1)))
    M = 4.0 * m * (K + 1.0) * R ** m / eta
    return SingularityScaleParams(x0=complex(x0), eta=eta, R=R, r=r, M=M, delta=1.0 / M,
                                  c_scale=4.0 / (M * eta))
