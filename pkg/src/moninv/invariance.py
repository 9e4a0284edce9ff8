"""Invariant verification, invariant synthesis, and controller extraction.

Verification checks the one-step condition on the maximal elements of the
candidate region only, against the worst-case disturbance points and (when
an input order is declared) the order-minimal inputs. Synthesis sandwiches
the maximal invariant between a proven-invariant lower region and a
proven-unsafe upper region, refining the frontier with a bisection queue
of boxes until the largest unresolved box is smaller than the requested
precision.
"""

from __future__ import annotations

import dataclasses
import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .dynamics import InputLabel, MonotoneSystem, step
from .feasibility import (
    Feasible,
    Undecided,
    Unsafe,
    UnsafeCertificate,
    UnsafeWitness,
    Verdict,
    leads_to_unsafe,
    open_loop_feasible,
)
from .order import (
    Antichain,
    Box,
    Front,
    LowerSet,
    Point,
    UpperSet,
    UsageError,
)


class PreconditionError(UsageError):
    """A verification or synthesis precondition failed."""


class ControllerDomainError(LookupError):
    """The controller was queried outside its domain."""

    def __init__(self, state: Point, reason: str = "state outside the invariant"):
        super().__init__(f"{reason}: {state}")
        self.state = state


@dataclass(frozen=True)
class StateCheck:
    state: Point
    chosen_input: Optional[InputLabel]
    successors: tuple[tuple[InputLabel, tuple[Point, ...]], ...]


@dataclass(frozen=True)
class VerifyReport:
    is_invariant: bool
    per_state: tuple[StateCheck, ...]
    states_checked: int
    successor_evaluations: int

    def witness(self) -> Optional[StateCheck]:
        """First state with every scanned input exhausted, if any."""
        return next((c for c in self.per_state if c.chosen_input is None), None)


def _check_state(sys, invariant: LowerSet, inputs, m: Point):
    scanned = []
    chosen = None
    evals = 0
    for u in inputs:
        frontier = tuple(step(sys, m, u, d) for d in sys.dist_points)
        evals += len(frontier)
        scanned.append((u, frontier))
        if chosen is None and all(invariant.contains(p) for p in frontier):
            chosen = u
    return StateCheck(m, chosen, tuple(scanned)), evals


def verify_invariant(
    sys: MonotoneSystem, constraint: LowerSet, candidate: LowerSet, jobs: int = 1
) -> VerifyReport:
    """One-step invariance check over the candidate's maximal elements.

    Every scanned input's successor frontier is recorded and the first
    admissible input is chosen, so the evaluation counter is exactly
    ``|max(K)| * |inputs scanned| * |worst-case disturbances|``.
    """
    for m in candidate.boundary.elements:
        if not constraint.contains(m):
            raise PreconditionError(
                f"candidate element {m} lies outside the constraint region"
            )
    inputs = sys.min_inputs
    elements = candidate.boundary.elements
    if jobs > 1 and len(elements) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(lambda m: _check_state(sys, candidate, inputs, m), elements)
            )
    else:
        results = [_check_state(sys, candidate, inputs, m) for m in elements]
    checks = tuple(r[0] for r in results)
    evals = sum(r[1] for r in results)
    ok = all(c.chosen_input is not None for c in checks)
    return VerifyReport(ok, checks, len(checks), evals)


class Controller:
    """Invariance controller: first declared input that keeps the
    worst-case successors inside the invariant, memoized per queried state."""

    def __init__(self, sys: MonotoneSystem, invariant: LowerSet):
        self.system = sys
        self.invariant = invariant
        self.table: dict[Point, InputLabel] = {}

    def __call__(self, x: Sequence[float]) -> InputLabel:
        return self.query(x)

    def query(self, x: Sequence[float]) -> InputLabel:
        x = self.system.space.check_point(x)
        cached = self.table.get(x)
        if cached is not None:
            return cached
        if not self.invariant.contains(x):
            raise ControllerDomainError(x)
        for u in self.system.inputs:
            succ = (step(self.system, x, u, d) for d in self.system.dist_points)
            if all(self.invariant.contains(p) for p in succ):
                self.table[x] = u
                return u
        raise ControllerDomainError(x, "no admissible input at member state")


def extract_controller(sys: MonotoneSystem, invariant: LowerSet) -> Controller:
    return Controller(sys, invariant)


def check_containment_lemma(
    sys: MonotoneSystem,
    constraint: LowerSet,
    u_sub: Sequence[InputLabel],
    u_sup: Sequence[InputLabel],
    d_sub: Sequence[Sequence[float]],
    d_sup: Sequence[Sequence[float]],
    candidate: LowerSet,
) -> bool:
    """Invariance w.r.t. (smaller inputs, larger disturbances) must imply
    invariance w.r.t. (larger inputs, smaller disturbances). Test-harness
    operation: returns the truth of that implication for the candidate."""
    if not set(u_sub) <= set(u_sup):
        raise UsageError("u_sub must be a subset of u_sup")
    if not {tuple(d) for d in d_sup} <= {tuple(d) for d in d_sub}:
        raise UsageError("d_sup must be a subset of d_sub")
    small = dataclasses.replace(sys, inputs=tuple(u_sub), dist_points=tuple(d_sub))
    large = dataclasses.replace(sys, inputs=tuple(u_sup), dist_points=tuple(d_sup))
    if not verify_invariant(small, constraint, candidate).is_invariant:
        return True
    return verify_invariant(large, constraint, candidate).is_invariant


class _RegionBuilder:
    """Mutable one-sided region accumulator used during synthesis."""

    __slots__ = ("space", "orientation", "front")

    def __init__(self, space, orientation: str):
        self.space = space
        self.orientation = orientation
        self.front = Front(space.dim)

    def _key(self, x) -> Point:
        if self.orientation == "max":
            return tuple(s * c for s, c in zip(self.space.signs, x))
        return tuple(-s * c for s, c in zip(self.space.signs, x))

    def insert(self, x: Point) -> None:
        self.front.insert(self._key(x), tuple(x))

    def contains(self, x) -> bool:
        if self.orientation == "max" and not self.space.above_floor(x):
            return False
        return self.front.cover_index(self._key(x)) is not None

    def _antichain(self) -> Antichain:
        front = Front(self.space.dim)
        front.keys = list(self.front.keys)
        front.points = list(self.front.points)
        front._k0 = list(self.front._k0)
        return Antichain._wrap(self.space, self.orientation, front)

    def to_lower_set(self) -> LowerSet:
        return LowerSet(self._antichain())

    def to_upper_set(self) -> UpperSet:
        return UpperSet(self._antichain())


@dataclass(frozen=True)
class InvariantResult:
    """Outcome of synthesis: the invariant, the sandwich regions, and the
    unresolved boxes. ``eps_claim`` is True only when no stalled boxes
    remain, in which case the maximal invariant lies within the requested
    precision of the returned one; otherwise the result is sound but
    possibly conservative."""

    invariant: LowerSet
    proven: LowerSet
    excluded: UpperSet
    undecided: tuple[tuple[Box, bool], ...]
    gap_final: float
    certificates: dict[Point, Verdict]
    epsilon: float
    counters: dict[str, int]
    gap_trace: tuple[float, ...]
    status: str  # "complete" or "stalled"

    @property
    def eps_claim(self) -> bool:
        return self.status == "complete"


def synthesize(
    sys: MonotoneSystem,
    constraint: LowerSet,
    epsilon: float,
    n_max: int,
    seeds: Optional[Sequence[Sequence[float]]] = None,
    *,
    feasible_min_inputs_only: bool = False,
) -> InvariantResult:
    """Approximate the maximal invariant inside the constraint region.

    First the constraint boundary's maximal elements are classified (all
    feasible means the whole region is invariant), then the seed points
    (all unsafe means the invariant is empty; the default seed is the
    order-minimal corner of the working box, standing in for the minimal
    constraint elements when those are not finitely representable). The
    main loop repeatedly classifies the center of the largest unresolved
    box, commits the resulting tube or exclusion point, and splits the box,
    until the largest unresolved box is within ``epsilon``. Centers that
    resolve at neither horizon stall their box: it stays unresolved, is
    skipped by the picker, and keeps the result labeled conservative.
    """
    if epsilon <= 0:
        raise UsageError(f"precision must be positive, got {epsilon}")
    space = sys.space
    box = space.base_box
    if box is None:
        raise UsageError("synthesis needs a base box on the state space")
    proven = _RegionBuilder(space, "max")
    excluded = _RegionBuilder(space, "min")
    certificates: dict[Point, Verdict] = {}
    counters = {"picks": 0, "feasible": 0, "unsafe": 0, "undecided": 0}
    gap_trace: list[float] = []

    def classify(x: Point) -> Verdict:
        verdict = open_loop_feasible(
            sys, constraint, x, n_max, min_inputs_only=feasible_min_inputs_only
        )
        if isinstance(verdict, Feasible):
            counters["feasible"] += 1
            for layer in verdict.certificate.layers[:-1]:
                for p in layer:
                    proven.insert(p)
        else:
            unsafe = leads_to_unsafe(sys, constraint, excluded, x, n_max)
            if isinstance(unsafe, Unsafe):
                counters["unsafe"] += 1
                excluded.insert(x)
                verdict = unsafe
            else:
                counters["undecided"] += 1
        certificates[x] = verdict
        return verdict

    def finish(invariant: LowerSet, undecided, gap_final, status) -> InvariantResult:
        return InvariantResult(
            invariant=invariant,
            proven=proven.to_lower_set(),
            excluded=excluded.to_upper_set(),
            undecided=tuple(undecided),
            gap_final=gap_final,
            certificates=certificates,
            epsilon=epsilon,
            counters=dict(counters),
            gap_trace=tuple(gap_trace),
            status=status,
        )

    # Phase 1: the constraint boundary itself.
    top_verdicts = [classify(m) for m in constraint.boundary.elements]
    if top_verdicts and all(isinstance(v, Feasible) for v in top_verdicts):
        return finish(constraint, (), 0.0, "complete")

    # Phase 2: seed points standing in for the minimal constraint elements.
    if seeds is None:
        seeds = (box.corner_signed_min(space.signs),)
    seed_verdicts = []
    for s in seeds:
        s = space.check_point(s)
        if not constraint.contains(s):
            raise UsageError(f"seed point {s} violates the constraint region")
        seed_verdicts.append(classify(s) if s not in certificates else certificates[s])
    if seed_verdicts and all(isinstance(v, Unsafe) for v in seed_verdicts):
        return finish(
            LowerSet.from_points(space, ()), (), 0.0, "complete"
        )

    signs = space.signs

    def resolved(b: Box) -> bool:
        return proven.contains(b.corner_signed_max(signs)) or excluded.contains(
            b.corner_signed_min(signs)
        )

    heap: list[tuple[float, Point, Point, Box]] = []

    def push(b: Box) -> None:
        if resolved(b):
            return
        if not constraint.contains(b.corner_signed_min(signs)):
            return  # entirely outside the constraint region
        heapq.heappush(heap, (-b.diameter, b.lo, b.hi, b))

    push(box)
    stalled: list[Box] = []
    while True:
        while heap and resolved(heap[0][3]):
            heapq.heappop(heap)
        stalled = [b for b in stalled if not resolved(b)]
        top = -heap[0][0] if heap else 0.0
        current_gap = max([top] + [b.diameter for b in stalled]) if (heap or stalled) else 0.0
        gap_trace.append(current_gap)
        if current_gap <= epsilon or not heap:
            break
        counters["picks"] += 1
        b = heapq.heappop(heap)[3]
        center = b.center
        if proven.contains(center) or excluded.contains(center):
            for child in b.split(center):
                push(child)
            continue
        if not constraint.contains(center):
            excluded.insert(center)
            certificates[center] = Unsafe(
                UnsafeCertificate(center, 0, (UnsafeWitness((), (), 0, center),))
            )
            for child in b.split(center):
                push(child)
            continue
        verdict = classify(center)
        if isinstance(verdict, Undecided):
            stalled.append(b)
            continue
        for child in b.split(center):
            push(child)

    leftovers = [(e[3], False) for e in heap if not resolved(e[3])]
    leftovers.sort(key=lambda t: (t[0].lo, t[0].hi))
    undecided = leftovers + [(b, True) for b in stalled]
    status = "stalled" if stalled else "complete"
    gap_final = gap_trace[-1] if gap_trace else 0.0
    return finish(proven.to_lower_set(), undecided, gap_final, status)
