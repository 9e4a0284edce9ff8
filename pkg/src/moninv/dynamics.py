"""System models: update maps, monotonicity metadata, builtin plants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .order import Box, LowerSet, OrderedSpace, Point, UsageError, as_point

# An input is a plain label (int), a scalar, or a vector of reals.
InputLabel = object

MONO_CLASSES = ("SM", "CSM", "DSM", "CDSM")


class EvaluationError(RuntimeError):
    """The update map produced a non-finite value."""

    def __init__(self, x: Point, u: InputLabel, d: Point, value):
        super().__init__(f"non-finite update at x={x}, u={u}, d={d}: {value}")
        self.x = x
        self.u = u
        self.d = d
        self.value = value


class MonotonicityRejection(UsageError):
    """A constructor refused parameters that break order preservation."""


def input_vector(u: InputLabel) -> tuple[float, ...]:
    if isinstance(u, tuple):
        return tuple(float(c) for c in u)
    return (float(u),)


@dataclass(frozen=True)
class MonotoneSystem:
    """Discrete-time control system with declared order structure.

    ``inputs`` is the finite input set in declaration order; searches and
    scans respect that order. ``dist_points`` is the finite worst-case
    disturbance set used by verification and feasibility; ``dist_box``,
    when present, is the full disturbance region that simulations draw
    from. ``input_signs``/``dist_signs`` declare the orders used by the
    CSM/DSM monotonicity classes. ``lipschitz`` bounds the state
    sensitivity of the update map in the L-infinity norm.
    """

    space: OrderedSpace
    inputs: tuple
    dist_points: tuple[Point, ...]
    dynamics: Callable[[Point, InputLabel, Point], Sequence[float]]
    mono_class: str
    input_signs: Optional[tuple[int, ...]] = None
    dist_signs: Optional[tuple[int, ...]] = None
    dist_box: Optional[Box] = None
    lipschitz: Optional[float] = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.mono_class not in MONO_CLASSES:
            raise UsageError(f"unknown monotonicity class {self.mono_class!r}")
        if not self.inputs:
            raise UsageError("the input set must be nonempty")
        if not self.dist_points:
            raise UsageError("the disturbance point set must be nonempty")
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(
            self, "dist_points", tuple(as_point(d) for d in self.dist_points)
        )
        if self.mono_class in ("CSM", "CDSM") and self.input_signs is None:
            raise UsageError(f"{self.mono_class} systems need input order signs")
        if self.mono_class in ("DSM", "CDSM") and self.dist_signs is None:
            raise UsageError(f"{self.mono_class} systems need disturbance order signs")

    @property
    def min_inputs(self) -> tuple:
        """Order-minimal inputs, or the full set when no input order is declared."""
        if self.input_signs is None:
            return self.inputs
        vecs = [input_vector(u) for u in self.inputs]

        def below(a, b):
            return all(s * p <= s * q for s, p, q in zip(self.input_signs, a, b))

        out = []
        for i, u in enumerate(self.inputs):
            if not any(
                j != i and below(vecs[j], vecs[i]) and vecs[j] != vecs[i]
                for j in range(len(vecs))
            ):
                out.append(u)
        return tuple(out)

    def input_leq(self, u1: InputLabel, u2: InputLabel) -> bool:
        if self.input_signs is None:
            return u1 == u2
        a, b = input_vector(u1), input_vector(u2)
        return all(s * p <= s * q for s, p, q in zip(self.input_signs, a, b))

    def dist_leq(self, d1: Sequence[float], d2: Sequence[float]) -> bool:
        if self.dist_signs is None:
            return tuple(d1) == tuple(d2)
        return all(s * p <= s * q for s, p, q in zip(self.dist_signs, d1, d2))


def step(sys: MonotoneSystem, x: Sequence[float], u: InputLabel, d: Sequence[float]) -> Point:
    """One application of the update map; rejects non-finite results."""
    x = sys.space.check_point(x)
    out = as_point(sys.dynamics(x, u, as_point(d)))
    if len(out) != sys.space.dim:
        raise EvaluationError(x, u, tuple(d), out)
    if not all(math.isfinite(c) for c in out):
        raise EvaluationError(x, u, tuple(d), out)
    return out


def make_switched_affine(
    a_mats: dict,
    b_mat: Optional[Sequence[Sequence[float]]] = None,
    offset: Optional[Sequence[float]] = None,
    *,
    space: OrderedSpace,
    dist_points: Sequence[Sequence[float]],
    dist_signs: Optional[Sequence[int]] = None,
    dist_box: Optional[Box] = None,
    name: str = "switched-affine",
) -> MonotoneSystem:
    """Switched affine plant ``x+ = A_u x + B d + c``.

    Every state matrix must be entrywise nonnegative after conjugation by
    the order signs, which is exactly the sign condition for state
    monotonicity; violations are rejected with the offending entry. The
    system is disturbance-state monotone when the conjugated disturbance
    matrix is nonnegative as well.
    """
    dim = space.dim
    signs = space.signs
    mats = {label: [list(map(float, row)) for row in m] for label, m in a_mats.items()}
    for label, m in mats.items():
        if len(m) != dim or any(len(row) != dim for row in m):
            raise UsageError(f"matrix for input {label!r} is not {dim}x{dim}")
        for i in range(dim):
            for j in range(dim):
                if signs[i] * signs[j] * m[i][j] < 0:
                    raise MonotonicityRejection(
                        f"state matrix for input {label!r} has a sign-violating "
                        f"entry at ({i + 1}, {j + 1}): {m[i][j]}"
                    )
    p = len(as_point(dist_points[0]))
    if b_mat is None:
        if p != dim:
            raise UsageError("identity disturbance matrix needs matching dimensions")
        b = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    else:
        b = [list(map(float, row)) for row in b_mat]
        if len(b) != dim or any(len(row) != p for row in b):
            raise UsageError(f"disturbance matrix is not {dim}x{p}")
    d_sgn = tuple(dist_signs) if dist_signs is not None else (1,) * p
    dsm = all(
        signs[i] * d_sgn[j] * b[i][j] >= 0 for i in range(dim) for j in range(p)
    )
    c = as_point(offset) if offset is not None else (0.0,) * dim
    labels = tuple(mats)

    def f(x: Point, u: InputLabel, d: Point) -> Point:
        m = mats[u]
        return tuple(
            sum(m[i][j] * x[j] for j in range(dim))
            + sum(b[i][j] * d[j] for j in range(p))
            + c[i]
            for i in range(dim)
        )

    lip = max(sum(abs(v) for v in row) for m in mats.values() for row in m)
    return MonotoneSystem(
        space=space,
        inputs=labels,
        dist_points=tuple(as_point(d) for d in dist_points),
        dynamics=f,
        mono_class="DSM" if dsm else "SM",
        dist_signs=d_sgn if dsm else None,
        dist_box=dist_box,
        lipschitz=lip,
        name=name,
    )


# Cruise-control plant constants (mass, rolling/aero drag, torque bounds,
# headway window, speed cap).
ACC_PARAMS = {
    "mass": 1370.0,
    "f0": 51.0709,
    "f2": 0.4161,
    "u_min": -4031.9,
    "u_max": 2687.9,
    "h_min": 10.0,
    "h_max": 70.0,
    "v_max": 15.0,
}


class DiscretizationRejection(UsageError):
    """The sampling period breaks monotonicity of the discretized map."""


def make_acc(params: Optional[dict] = None, tau: float = 0.5) -> MonotoneSystem:
    """Euler-discretized cruise-control plant in flipped coordinates.

    State is ``(z, v)`` with ``z = -headway`` so that both safety
    constraints (headway above its minimum, speed below its cap) become
    upper bounds and the constraint region is lower closed. The lead-car
    speed enters as ``d' = -d``, making the standing-still lead the
    order-maximal disturbance. The speed update is clamped at zero, which
    the continuous model guarantees; the sampling period is rejected when
    it would make the speed update non-monotone over the speed range.
    """
    p = dict(ACC_PARAMS)
    if params:
        p.update(params)
    if tau <= 0:
        raise UsageError(f"sampling period must be positive, got {tau}")
    mass, f0, f2 = p["mass"], p["f0"], p["f2"]
    v_max = p["v_max"]
    slope = 1.0 - 2.0 * tau * f2 * v_max / mass
    if slope < 0.0:
        raise DiscretizationRejection(
            f"tau={tau} makes the speed update decreasing near v={v_max} "
            f"(slope {slope:.4g})"
        )

    def f(x: Point, u: InputLabel, d: Point) -> Point:
        z, v = x
        if v > 0.0:
            accel = u - f0 - f2 * v * v
        else:
            accel = max(u - f0, 0.0)
        v_next = v + (tau / mass) * accel
        if v_next < 0.0:
            v_next = 0.0
        return (z + tau * (v + d[0]), v_next)

    box = Box((-p["h_max"], 0.0), (-p["h_min"], v_max))
    space = OrderedSpace(2, (1, 1), base_box=box, floor=(None, 0.0))
    return MonotoneSystem(
        space=space,
        inputs=(p["u_min"], p["u_max"]),
        dist_points=((0.0,),),
        dynamics=f,
        mono_class="CDSM",
        input_signs=(1,),
        dist_signs=(1,),
        dist_box=Box((-v_max,), (0.0,)),
        lipschitz=1.0 + tau,
        name="acc",
    )


@dataclass(frozen=True)
class BuiltinModel:
    system: MonotoneSystem
    constraint: LowerSet
    epsilon: float
    n_max: int
    seeds: Optional[tuple[Point, ...]] = None


def builtin_switched2d() -> BuiltinModel:
    """Two-mode planar switched system; each mode alone diverges."""
    box = Box((0.0, 0.0), (60.0, 60.0))
    space = OrderedSpace(2, (1, 1), base_box=box, floor=(0.0, 0.0))
    system = make_switched_affine(
        {1: ((1.2, 0.1), (0.2, 0.5)), 2: ((0.4, 0.1), (0.1, 1.1))},
        space=space,
        dist_points=((0.2, 0.2),),
        dist_box=Box((0.0, 0.0), (0.2, 0.2)),
        name="switched2d",
    )
    constraint = LowerSet.from_points(space, [(60.0, 60.0)])
    return BuiltinModel(system, constraint, epsilon=1.0, n_max=12)


def builtin_acc(tau: float = 0.5) -> BuiltinModel:
    system = make_acc(tau=tau)
    box = system.space.base_box
    constraint = LowerSet.from_points(system.space, [box.hi])
    return BuiltinModel(
        system,
        constraint,
        epsilon=1.5,
        n_max=50,
        seeds=(box.corner_signed_min(system.space.signs),),
    )


BUILTINS = {"switched2d": builtin_switched2d, "acc": builtin_acc}


@dataclass(frozen=True)
class MonotonicityReport:
    class_confirmed: bool
    counterexample: Optional[tuple] = None
    samples: int = 0
    note: str = ""


def _ordered_pair(rng: np.random.Generator, lo, hi, signs) -> tuple[Point, Point]:
    a = tuple(rng.uniform(l, h) for l, h in zip(lo, hi))
    b = tuple(rng.uniform(l, h) for l, h in zip(lo, hi))
    low = tuple(min(s * p, s * q) * s for s, p, q in zip(signs, a, b))
    high = tuple(max(s * p, s * q) * s for s, p, q in zip(signs, a, b))
    return low, high


def validate_monotonicity(
    sys: MonotoneSystem, n_samples: int, seed: int = 0
) -> MonotonicityReport:
    """Sampled order-preservation check for the declared class.

    Draws ordered argument tuples uniformly from the working box and the
    declared input/disturbance sets and compares the mapped pair. The first
    violation is reported as a counterexample; none found confirms the
    class at the sampled resolution only.
    """
    if n_samples <= 0:
        return MonotonicityReport(True, None, 0, "untested: zero samples requested")
    if sys.space.base_box is None:
        raise UsageError("monotonicity sampling needs a base box")
    rng = np.random.default_rng(seed)
    box = sys.space.base_box
    ordered_inputs = sys.mono_class in ("CSM", "CDSM")
    ordered_dists = sys.mono_class in ("DSM", "CDSM")
    pairs = None
    if ordered_inputs:
        pairs = [
            (u1, u2)
            for u1 in sys.inputs
            for u2 in sys.inputs
            if sys.input_leq(u1, u2)
        ]
    for _ in range(n_samples):
        x1, x2 = _ordered_pair(rng, box.lo, box.hi, sys.space.signs)
        if ordered_inputs:
            u1, u2 = pairs[rng.integers(len(pairs))]
        else:
            u1 = u2 = sys.inputs[rng.integers(len(sys.inputs))]
        if ordered_dists:
            if sys.dist_box is not None:
                d1, d2 = _ordered_pair(
                    rng, sys.dist_box.lo, sys.dist_box.hi, sys.dist_signs
                )
            else:
                comparable = [
                    (a, b)
                    for a in sys.dist_points
                    for b in sys.dist_points
                    if sys.dist_leq(a, b)
                ]
                d1, d2 = comparable[rng.integers(len(comparable))]
        else:
            d1 = d2 = sys.dist_points[rng.integers(len(sys.dist_points))]
        y1 = step(sys, x1, u1, d1)
        y2 = step(sys, x2, u2, d2)
        if not all(s * a <= s * b for s, a, b in zip(sys.space.signs, y1, y2)):
            return MonotonicityReport(
                False, (x1, u1, d1, x2, u2, d2, y1, y2), n_samples
            )
    return MonotonicityReport(True, None, n_samples)
