"""Dormand-Prince 5(4) embedded pair for small complex-valued systems.

States are tuples of Python complex numbers; plain scalar arithmetic beats
numpy by a wide margin at these sizes (one or two components).
"""

from __future__ import annotations

import math

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between the 5th and embedded 4th order weights
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def _axpy(y, h, *pairs):
    out = []
    for i, yi in enumerate(y):
        acc = yi
        for coef, k in pairs:
            acc += h * coef * k[i]
        out.append(acc)
    return tuple(out)


def dopri_step(f, t, y, h, k1=None):
    """One Dormand-Prince step.

    Returns ``(y_new, error_vector, k7)``; ``k7`` is ``f(t + h, y_new)`` and
    can be reused as ``k1`` of the next step (FSAL).
    """
    if k1 is None:
        k1 = f(t, y)
    k2 = f(t + C2 * h, _axpy(y, h, (A21, k1)))
    k3 = f(t + C3 * h, _axpy(y, h, (A31, k1), (A32, k2)))
    k4 = f(t + C4 * h, _axpy(y, h, (A41, k1), (A42, k2), (A43, k3)))
    k5 = f(t + C5 * h, _axpy(y, h, (A51, k1), (A52, k2), (A53, k3), (A54, k4)))
    k6 = f(t + h, _axpy(y, h, (A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)))
    y_new = _axpy(y, h, (B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6))
    k7 = f(t + h, y_new)
    err = tuple(
        h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        for i in range(len(y))
    )
    return y_new, err, k7


def error_norm(err, y_old, y_new, rtol, atol):
    worst = 0.0
    for e, a, b in zip(err, y_old, y_new):
        scale = atol + rtol * max(abs(a), abs(b))
        r = abs(e) / scale
        if r > worst:
            worst = r
    return worst


def next_step(h, err_norm):
    if err_norm == 0.0:
        return h * MAX_FACTOR
    if not math.isfinite(err_norm):
        return h * MIN_FACTOR
    factor = SAFETY * err_norm ** -0.2
    return h * min(MAX_FACTOR, max(MIN_FACTOR, factor))


def integrate(f, t0, t1, y0, rtol=1e-12, atol=None, h0=None, min_step=None, max_steps=200000,
              on_step=None):
    """Integrate ``y' = f(t, y)`` on the real interval ``[t0, t1]``.

    ``on_step(t, y)`` is called after each accepted step; ``f`` may raise to
    abort the integration.

    Returns the final state. Raises ``StepFailure`` on step underflow.
    """
    from .errors import StepFailure

    if atol is None:
        atol = rtol
    span = t1 - t0
    if span == 0:
        return tuple(y0)
    direction = 1.0 if span > 0 else -1.0
    length = abs(span)
    if min_step is None:
        min_step = 1e-14 * length
    h = h0 if h0 is not None else 0.01 * length
    h = min(h, length)
    t, y = t0, tuple(y0)
    k1 = f(t, y)
    steps = 0
    while direction * (t1 - t) > 0:
        if steps > max_steps:
            raise StepFailure("too many steps")
        remaining = abs(t1 - t)
        h = min(h, remaining)
        y_new, err, k7 = dopri_step(f, t, y, direction * h, k1)
        en = error_norm(err, y, y_new, rtol, atol)
        if en <= 1.0 and all(math.isfinite(v.real) and math.isfinite(v.imag) for v in y_new):
            t = t1 if h == remaining else t + direction * h
            y = y_new
            k1 = k7
            steps += 1
            if on_step is not None:
                on_step(t, y)
            h = next_step(h, en)
        else:
            h = next_step(h, en if math.isfinite(en) else math.inf)
            if h < min_step:
                raise StepFailure(f"step size underflow at t={t}")
    return y
