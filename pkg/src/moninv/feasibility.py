"""Open-loop feasibility search, unsafe-set search, and tube slack margins.

A point is feasible when some input word keeps its worst-case reach tube
inside the constraint region and lands the final layer below the union of
the earlier layers; the whole lower closure of such a tube is then
invariant. A point leads to the unsafe side when every input choice,
recursively, either exits the constraint region, hits the accumulated
unsafe region, or reaches a successor with the same property. Neither
search is guaranteed to resolve at a finite horizon, so `Undecided` is a
first-class outcome rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .dynamics import InputLabel, MonotoneSystem, step
from .order import Antichain, LowerSet, Point, UsageError

Layers = tuple[tuple[Point, ...], ...]


@dataclass(frozen=True)
class FeasibilityCertificate:
    """Witness tube for a feasible point.

    ``layers`` holds the pruned frontiers for steps 0..n_steps inclusive;
    the invariant tube is the lower closure of layers 0..n_steps-1.
    ``eps_n`` is the coordinate margin by which the final layer sits below
    the earlier tube, ``gamma`` the margin by which the intermediate layers
    sit inside the constraint region (L-infinity, +inf for one-step tubes).
    """

    x0: Point
    u_word: tuple[InputLabel, ...]
    n_steps: int
    layers: Layers
    eps_n: float
    gamma: float


@dataclass(frozen=True)
class UnsafeWitness:
    u_word: tuple[InputLabel, ...]
    d_word: tuple[Point, ...]
    hit_step: int
    point: Point


@dataclass(frozen=True)
class UnsafeCertificate:
    """Input-tree witnesses: every explored input branch carries a hit."""

    x0: Point
    horizon: int
    witnesses: tuple[UnsafeWitness, ...]


@dataclass(frozen=True)
class Feasible:
    certificate: FeasibilityCertificate


@dataclass(frozen=True)
class Unsafe:
    certificate: UnsafeCertificate


@dataclass(frozen=True)
class Undecided:
    horizon: int


Verdict = Union[Feasible, Unsafe, Undecided]


class CertificateError(AssertionError):
    """A certificate failed its independent recheck."""


def _dominated_by_earlier(space, p: Point, layers: list) -> bool:
    return any(
        all(s * a <= s * b for s, a, b in zip(space.signs, p, q))
        for layer in layers
        for q in layer
    )


def open_loop_feasible(
    sys: MonotoneSystem,
    constraint: LowerSet,
    x0: Sequence[float],
    n_max: int,
    *,
    min_inputs_only: bool = False,
) -> Union[Feasible, Undecided]:
    """Iterative-deepening search for a feasible input word.

    Words are explored depth-first in input declaration order, shortest
    horizons first, so the returned certificate is minimal in length and
    then lexicographic. A branch is pruned as soon as its frontier exits
    the constraint region. When a pass dies without ever touching the depth
    cap the tree is exhausted and deeper passes would repeat it, so the
    search stops early. ``min_inputs_only`` restricts the word alphabet to
    the order-minimal inputs; that preserves the verdict only for plants
    satisfying the corresponding input-reduction condition, so it is opt-in.
    """
    x0 = sys.space.check_point(x0)
    if not constraint.contains(x0):
        raise UsageError(f"feasibility search requires the start {x0} to satisfy the constraint")
    if n_max < 1:
        return Undecided(0)
    inputs = sys.min_inputs if min_inputs_only else sys.inputs
    space = sys.space

    for limit in range(1, n_max + 1):
        capped = False
        layers: list[tuple[Point, ...]] = [(x0,)]

        def dfs(depth: int) -> Optional[list]:
            nonlocal capped
            if depth == limit:
                capped = True
                return None
            for u in inputs:
                images = [
                    step(sys, p, u, d) for p in layers[-1] for d in sys.dist_points
                ]
                frontier = Antichain(space, "max", images).elements
                if not all(constraint.contains(p) for p in frontier):
                    continue
                if all(_dominated_by_earlier(space, p, layers) for p in frontier):
                    return [u]
                layers.append(frontier)
                rest = dfs(depth + 1)
                layers.pop()
                if rest is not None:
                    return [u] + rest
            return None

        word = dfs(0)
        if word is not None:
            tube = _tube_frontiers(sys, x0, word)
            eps_n, gamma = extract_slacks(tube, constraint)
            cert = FeasibilityCertificate(
                x0, tuple(word), len(word), tube, eps_n, gamma
            )
            return Feasible(cert)
        if not capped:
            return Undecided(limit)
    return Undecided(n_max)


def _tube_frontiers(sys, x0: Point, word: Sequence[InputLabel]) -> Layers:
    layers = [(x0,)]
    for u in word:
        images = [step(sys, p, u, d) for p in layers[-1] for d in sys.dist_points]
        layers.append(Antichain(sys.space, "max", images).elements)
    return tuple(layers)


def _pruned_successors(sys, x: Point, u: InputLabel) -> list[tuple[int, Point]]:
    images = [(di, step(sys, x, u, d)) for di, d in enumerate(sys.dist_points)]
    kept = set(Antichain(sys.space, "max", [p for _, p in images]).elements)
    out, seen = [], set()
    for di, p in images:
        if p in kept and p not in seen:
            out.append((di, p))
            seen.add(p)
    return out


def leads_to_unsafe(
    sys: MonotoneSystem,
    constraint: LowerSet,
    unsafe_region,
    x0: Sequence[float],
    n_max: int,
) -> Union[Unsafe, Undecided]:
    """Prove that every input strategy reaches the unsafe side.

    The unsafe side is the union of ``unsafe_region`` (anything with a
    ``contains`` method over an upper-closed set) and the complement of the
    constraint region. The proof tree conjoins over inputs and picks, per
    input, one worst-case successor that hits now or recursively leads
    there. When an input order is declared the alphabet is reduced to the
    order-minimal inputs: states and successors only grow with the input,
    and the unsafe side is upper closed, so a proof against the minimal
    inputs covers the rest.
    """
    x0 = sys.space.check_point(x0)
    if not constraint.contains(x0):
        raise UsageError(f"unsafe search requires the start {x0} to satisfy the constraint")
    if unsafe_region is not None and unsafe_region.contains(x0):
        cert = UnsafeCertificate(x0, 0, (UnsafeWitness((), (), 0, x0),))
        return Unsafe(cert)
    inputs = sys.min_inputs

    def hits(p: Point) -> bool:
        if not constraint.contains(p):
            return True
        return unsafe_region is not None and unsafe_region.contains(p)

    def prove(x: Point, budget: int) -> Optional[list[UnsafeWitness]]:
        if budget < 1:
            return None
        witnesses: list[UnsafeWitness] = []
        for u in inputs:
            succs = _pruned_successors(sys, x, u)
            hit = next(((di, p) for di, p in succs if hits(p)), None)
            if hit is not None:
                di, p = hit
                witnesses.append(UnsafeWitness((u,), (sys.dist_points[di],), 1, p))
                continue
            sub = None
            for di, p in succs:
                sub = prove(p, budget - 1)
                if sub is not None:
                    d = sys.dist_points[di]
                    witnesses.extend(
                        UnsafeWitness(
                            (u,) + w.u_word, (d,) + w.d_word, w.hit_step + 1, w.point
                        )
                        for w in sub
                    )
                    break
            if sub is None:
                return None
        return witnesses

    found = prove(x0, n_max)
    if found is None:
        return Undecided(n_max)
    horizon = max(w.hit_step for w in found)
    return Unsafe(UnsafeCertificate(x0, horizon, tuple(found)))


def extract_slacks(layers: Layers, constraint: LowerSet) -> tuple[float, float]:
    """Coordinate margins of a feasible tube, exact for L-infinity balls.

    Returns ``(eps_n, gamma)``: eps_n is the worst final-layer point's best
    domination margin against the earlier tube; gamma is the worst
    intermediate-layer point's best containment margin against the
    constraint boundary. Both clip at zero; gamma is +inf when the tube has
    no intermediate layers.
    """
    signs = constraint.space.signs
    n = len(layers) - 1
    earlier = [p for layer in layers[:n] for p in layer]

    def margin(p: Point, targets) -> float:
        best = -math.inf
        for q in targets:
            if all(s * a <= s * b for s, a, b in zip(signs, p, q)):
                best = max(best, min(s * (b - a) for s, a, b in zip(signs, p, q)))
        return best

    eps_n = min((margin(p, earlier) for p in layers[n]), default=math.inf)
    boundary = constraint.boundary.elements
    gamma = min(
        (margin(p, boundary) for k in range(1, n) for p in layers[k]),
        default=math.inf,
    )
    return max(eps_n, 0.0), max(gamma, 0.0) if math.isfinite(gamma) else gamma


def feasibility_radius(eps_n: float, gamma: float, lipschitz: float, n_steps: int) -> float:
    """Order-cone neighborhood radius certified by a slack tube.

    Backward recursion: the final ball radius is the smaller of the two
    slacks, each earlier radius is the next one shrunk by the Lipschitz
    constant and capped by the constraint margin, and the usable radius is
    the smallest along the tube.
    """
    if lipschitz <= 0:
        raise UsageError("the Lipschitz constant must be positive")
    if n_steps < 1:
        raise UsageError("the horizon must be at least one step")
    beta = min(eps_n, gamma)
    best = beta
    for _ in range(n_steps - 1, 0, -1):
        eps_k = beta / lipschitz
        beta = min(eps_k, gamma)
        best = min(best, beta)
    return best


def check_certificate(
    sys: MonotoneSystem, constraint: LowerSet, cert: FeasibilityCertificate
) -> None:
    """Independent recheck of a feasibility certificate; raises on failure."""
    tube = _tube_frontiers(sys, cert.x0, cert.u_word)
    if tube != cert.layers:
        raise CertificateError("recorded layers do not match the recomputed tube")
    n = cert.n_steps
    if n < 1 or len(cert.layers) != n + 1:
        raise CertificateError("certificate layer count is inconsistent")
    for k in range(n):
        for p in cert.layers[k]:
            if not constraint.contains(p):
                raise CertificateError(f"layer {k} point {p} violates the constraint")
    earlier = list(cert.layers[:n])
    for p in cert.layers[n]:
        if not _dominated_by_earlier(sys.space, p, earlier):
            raise CertificateError(f"final layer point {p} is not dominated")
    eps_n, gamma = extract_slacks(cert.layers, constraint)
    if eps_n != cert.eps_n or gamma != cert.gamma:
        raise CertificateError("recorded slacks do not match the recomputed margins")


def replay_unsafe_witness(
    sys: MonotoneSystem, cert: UnsafeCertificate, witness: UnsafeWitness
) -> Point:
    """Re-simulate one recorded branch; returns the state at the hit step."""
    x = cert.x0
    for u, d in zip(witness.u_word, witness.d_word):
        x = step(sys, x, u, d)
    return x
