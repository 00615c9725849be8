"""Monodromy of the level curves ``H = y0`` of the model over the ``x`` plane.

Branches are tracked in the chart ``u = 1/y`` where all ``n + 1`` roots stay
finite. Each step recomputes the roots and matches them to the previous ones
by nearest neighbour; a step is accepted only if the new roots are separated
by more than three times the largest displacement, otherwise it is halved.
"""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass

from .core import ComplexPath, circle, keyhole_loop
from .errors import DomainError, TrackingAmbiguous
from .model import LocalModelParams, _u_roots, branches_at, movable_singularity

MAX_HALVINGS = 20


@dataclass
class MonodromyPermutation:
    """``permutation[i] = j``: branch ``i`` at the base point continues to branch ``j``."""

    loop: ComplexPath
    permutation: list[int]

    def cycles(self) -> list[list[int]]:
        return permutation_cycles(self.permutation)

    def cycle_notation(self) -> str:
        return cycle_notation(self.permutation)

    def order(self) -> int:
        return permutation_order(self.permutation)

    def to_json(self) -> dict:
        return {"permutation": list(self.permutation), "cycles": self.cycle_notation(),
                "order": self.order(), "loop": self.loop.to_json()}


def permutation_cycles(perm: list[int]) -> list[list[int]]:
    seen = set()
    out = []
    for i in range(len(perm)):
        if i in seen:
            continue
        cyc = [i]
        seen.add(i)
        j = perm[i]
        while j != i:
            cyc.append(j)
            seen.add(j)
            j = perm[j]
        out.append(cyc)
    return out


def cycle_notation(perm: list[int]) -> str:
    """One-line cycle notation, fixed points included, e.g. ``(0 1)(2)``."""
    return "".join("(" + " ".join(map(str, c)) + ")" for c in permutation_cycles(perm))


def permutation_order(perm: list[int]) -> int:
    out = 1
    for c in permutation_cycles(perm):
        out = out * len(c) // math.gcd(out, len(c))
    return out


def _match(old: list[complex], new: list[complex]):
    """Nearest-neighbour matching, or ``None`` when it is not safely unique."""
    order = []
    used = set()
    move = 0.0
    for z in old:
        j = min(range(len(new)), key=lambda k: abs(new[k] - z))
        if j in used:
            return None
        used.add(j)
        order.append(j)
        move = max(move, abs(new[j] - z))
    gap = min((abs(a - b) for i, a in enumerate(new) for b in new[i + 1:]), default=math.inf)
    if gap < 3.0 * move:
        return None
    return [new[j] for j in order]


def track_branches(params: LocalModelParams, y0: complex, path: ComplexPath,
                   start_roots: list[complex] | None = None, steps: int = 256,
                   record: bool = False):
    """Continue the ``u``-roots of ``H = y0`` along ``path``.

    Returns the list of roots at ``path.end`` in the order of
    ``start_roots`` (default: the order of :func:`branches_at` at the start),
    and the track when ``record`` is set.

    Raises
    ------
    TrackingAmbiguous
        If a step cannot be matched safely after ``MAX_HALVINGS`` halvings.
    """
    y0 = complex(y0)
    roots = list(start_roots) if start_roots is not None else branches_at(params, y0, path.start).u_roots
    L = path.length
    track = [(0.0, list(roots))] if record else None

    def advance(t0, t1, cur, depth):
        new = _match(cur, _u_roots(params, y0, path.point(t1), polish=False))
        if new is not None:
            if record:
                track.append((t1, list(new)))
            return new
        if depth >= MAX_HALVINGS:
            raise TrackingAmbiguous(f"root matching failed near x = {path.point(t1)}")
        mid = 0.5 * (t0 + t1)
        cur = advance(t0, mid, cur, depth + 1)
        return advance(mid, t1, cur, depth + 1)

    for k in range(steps):
        t0, t1 = L * k / steps, L * (k + 1) / steps
        roots = advance(t0, t1, roots, 0)
    return (roots, track) if record else roots


def monodromy(params: LocalModelParams, y0: complex, loop: ComplexPath,
              steps: int = 256) -> MonodromyPermutation:
    """Permutation of the branches above ``loop.start`` induced by going around ``loop``."""
    y0 = complex(y0)
    if y0 == 0:
        raise DomainError("y0 must be nonzero")
    if abs(loop.end - loop.start) > 1e-10 * (1.0 + abs(loop.start)):
        raise DomainError("loop must be closed")
    x0 = movable_singularity(params, y0).location
    base = branches_at(params, y0, loop.start)
    for pt in (0j, x0):
        if loop.distance_to(pt) < 1e-3 * (1.0 + abs(pt)):
            raise DomainError(f"loop passes too close to the branch point {pt}")
    end = track_branches(params, y0, loop, base.u_roots, steps)
    perm = []
    for z in end:
        j = min(range(len(base.u_roots)), key=lambda k: abs(base.u_roots[k] - z))
        perm.append(j)
    if sorted(perm) != list(range(len(perm))):
        raise TrackingAmbiguous("end roots do not match the start roots")
    return MonodromyPermutation(loop, perm)


def generator_base_point(params: LocalModelParams, y0: complex) -> complex:
    x0 = movable_singularity(params, y0).location
    return 0.5 * abs(x0) * cmath.exp(1j * (cmath.phase(x0) + math.pi / 2))


def generator_loops(params: LocalModelParams, y0: complex) -> dict[str, ComplexPath]:
    """Loops based at :func:`generator_base_point`.

    ``"z"`` turns once around 0, ``"w"`` once around the movable singularity,
    ``"both"`` once around a circle enclosing both.
    """
    x0 = movable_singularity(params, y0).location
    xb = generator_base_point(params, y0)
    return {
        "z": circle(0j, xb, 1),
        "w": keyhole_loop(xb, x0, 0.25 * abs(x0), 1),
        "both": keyhole_loop(xb, 0j, 2.0 * abs(x0), 1),
    }


def regular_branch_label(params: LocalModelParams, y0: complex, x_b: complex) -> int:
    """Label at ``x_b`` of the branch that stays bounded (``y -> y0``) as ``x -> 0`` radially."""
    from .core import line

    base = branches_at(params, y0, x_b)
    # stop while the escaping branches (u ~ x / v1) are still well separated
    end = track_branches(params, y0, line(x_b, 0.05 * x_b), base.u_roots)
    target = 1.0 / complex(y0)
    return min(range(len(end)), key=lambda k: abs(end[k] - target))


def compose(p: list[int], q: list[int]) -> list[int]:
    """Apply ``p`` first, then ``q``."""
    return [q[p[i]] for i in range(len(p))]


def orbit_words(generators: dict[str, list[int]], start: int = 0) -> dict[int, str]:
    """Shortest words (applied left to right) carrying ``start`` to every reachable label."""
    words = {start: ""}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for name, perm in sorted(generators.items()):
            j = perm[i]
            if j not in words:
                words[j] = words[i] + name
                queue.append(j)
    return words


@dataclass
class IrreducibilityResult:
    irreducible: bool
    witness: dict[int, str]
    generators: dict[str, list[int]]
    base_point: complex

    def __bool__(self):
        return self.irreducible

    def to_json(self) -> dict:
        return {"irreducible": self.irreducible,
                "witness": {str(k): v for k, v in sorted(self.witness.items())},
                "generators": {k: cycle_notation(v) for k, v in self.generators.items()},
                "base_point": [self.base_point.real, self.base_point.imag]}


def irreducibility_check(params: LocalModelParams, y0: complex) -> IrreducibilityResult:
    """Transitivity of the monodromy group generated by the loops around 0 and ``x0``.

    The witness maps each branch label to a word in ``w`` (loop around the
    movable singularity) and ``z`` (turn around zero) that carries branch 0
    to it.
    """
    y0 = complex(y0)
    if y0 == 0:
        raise DomainError("y0 = 0: the level curve splits into two leaves")
    loops = generator_loops(params, y0)
    gens = {name: monodromy(params, y0, loops[name]).permutation for name in ("w", "z")}
    words = orbit_words(gens)
    return IrreducibilityResult(len(words) == params.n + 1, words, gens,
                                generator_base_point(params, y0))
