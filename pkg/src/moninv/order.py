"""Orthant partial orders, antichain maintenance, and closed-set algebra.

Points are plain tuples of floats. An :class:`OrderedSpace` fixes the
dimension and a per-coordinate sign vector; ``x <= y`` holds when
``sign[i]*x[i] <= sign[i]*y[i]`` for every coordinate. Lower-closed regions
are represented by the antichain of their maximal points, upper-closed
regions by their minimal points. All public values are immutable;
:class:`Front` is the one mutable accumulator, meant for incremental
construction.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

Point = tuple[float, ...]


class UsageError(ValueError):
    """An operation was called with operands outside its contract."""


class DimensionMismatch(UsageError):
    pass


class SpaceMismatch(UsageError):
    pass


def as_point(coords: Sequence[float]) -> Point:
    return tuple(float(c) for c in coords)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in raw coordinates with ``lo <= hi`` componentwise."""

    lo: Point
    hi: Point

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", as_point(self.lo))
        object.__setattr__(self, "hi", as_point(self.hi))
        if len(self.lo) != len(self.hi):
            raise DimensionMismatch(
                f"box corners disagree on dimension: {len(self.lo)} vs {len(self.hi)}"
            )
        for i, (a, b) in enumerate(zip(self.lo, self.hi)):
            if a > b:
                raise UsageError(f"box has lo > hi in coordinate {i}: {a} > {b}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> Point:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    @property
    def diameter(self) -> float:
        """L-infinity diameter."""
        return max((b - a) for a, b in zip(self.lo, self.hi))

    def contains(self, x: Sequence[float]) -> bool:
        return all(a <= c <= b for a, c, b in zip(self.lo, x, self.hi))

    def corner_signed_max(self, signs: Sequence[int]) -> Point:
        """Corner maximal in the sign-adjusted order."""
        return tuple(h if s > 0 else l for s, l, h in zip(signs, self.lo, self.hi))

    def corner_signed_min(self, signs: Sequence[int]) -> Point:
        return tuple(l if s > 0 else h for s, l, h in zip(signs, self.lo, self.hi))

    def split(self, at: Sequence[float]) -> list["Box"]:
        """Subdivide at an interior point, one child per orthant.

        Coordinates where ``at`` is not strictly inside are left unsplit, so
        degenerate children are never produced.
        """
        cuts = []
        for i, c in enumerate(at):
            if self.lo[i] < c < self.hi[i]:
                cuts.append(((self.lo[i], c), (c, self.hi[i])))
            else:
                cuts.append(((self.lo[i], self.hi[i]),))
        children = [((), ())]
        for ranges in cuts:
            children = [
                (lo + (r[0],), hi + (r[1],)) for lo, hi in children for r in ranges
            ]
        return [Box(lo, hi) for lo, hi in children]


@dataclass(frozen=True)
class OrderedSpace:
    """Dimension, orthant order signs, and the working region.

    ``base_box`` bounds the region explored by synthesis, sampling and the
    grid oracle. ``floor`` holds optional hard raw lower bounds enforced on
    set membership (state constraints the dynamics itself maintains, e.g. a
    nonnegative orthant); ``None`` entries leave the coordinate unbounded
    below.
    """

    dim: int
    signs: tuple[int, ...]
    base_box: Optional[Box] = None
    floor: Optional[tuple[Optional[float], ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if self.dim <= 0:
            raise UsageError(f"dimension must be positive, got {self.dim}")
        if len(self.signs) != self.dim:
            raise DimensionMismatch(
                f"expected {self.dim} signs, got {len(self.signs)}"
            )
        if any(s not in (-1, 1) for s in self.signs):
            raise UsageError(f"signs must be +1 or -1, got {self.signs}")
        if self.base_box is not None and self.base_box.dim != self.dim:
            raise DimensionMismatch("base box dimension mismatch")
        if self.floor is not None:
            object.__setattr__(
                self,
                "floor",
                tuple(None if b is None else float(b) for b in self.floor),
            )
            if len(self.floor) != self.dim:
                raise DimensionMismatch("floor bound dimension mismatch")

    def check_point(self, x: Sequence[float]) -> Point:
        if len(x) != self.dim:
            raise DimensionMismatch(
                f"point has {len(x)} coordinates, space has {self.dim}"
            )
        return as_point(x)

    def signed(self, x: Sequence[float]) -> Point:
        return tuple(s * c for s, c in zip(self.signs, x))

    def above_floor(self, x: Sequence[float]) -> bool:
        if self.floor is None:
            return True
        return all(b is None or c >= b for b, c in zip(self.floor, x))


def leq(space: OrderedSpace, x: Sequence[float], y: Sequence[float]) -> bool:
    """Componentwise sign-adjusted order: x below-or-equal y."""
    x = space.check_point(x)
    y = space.check_point(y)
    return all(s * a <= s * b for s, a, b in zip(space.signs, x, y))


def lt(space: OrderedSpace, x: Sequence[float], y: Sequence[float]) -> bool:
    return leq(space, x, y) and tuple(x) != tuple(y)


def incomparable(space: OrderedSpace, x: Sequence[float], y: Sequence[float]) -> bool:
    return not leq(space, x, y) and not leq(space, y, x)


class Front:
    """Mutable antichain accumulator with dominance pruning.

    Keys are transformed tuples in which "kept" always means componentwise
    maximal; callers map their order onto that convention. In two dimensions
    the keys are held sorted by first coordinate (second coordinate then
    strictly decreasing), giving logarithmic cover queries; other dimensions
    fall back to linear scans.
    """

    __slots__ = ("dim", "keys", "points", "_k0")

    def __init__(self, dim: int):
        self.dim = dim
        self.keys: list[Point] = []
        self.points: list[Point] = []
        self._k0: list[float] = []

    def __len__(self) -> int:
        return len(self.keys)

    def cover_index(self, key: Point) -> Optional[int]:
        """Index of a stored key componentwise >= ``key``, else None."""
        if not self.keys:
            return None
        if self.dim == 2:
            i = bisect.bisect_left(self._k0, key[0])
            if i < len(self.keys) and self.keys[i][1] >= key[1]:
                return i
            return None
        if self.dim == 1:
            return len(self.keys) - 1 if self.keys[-1][0] >= key[0] else None
        for i, k in enumerate(self.keys):
            if all(a >= b for a, b in zip(k, key)):
                return i
        return None

    def insert(self, key: Point, point: Point) -> bool:
        """Add a key unless dominated; evict anything it dominates.

        Returns True when the key was kept.
        """
        if self.cover_index(key) is not None:
            return False
        if self.dim == 2:
            i2 = bisect.bisect_right(self._k0, key[0])
            # dominated keys form a tail of the prefix keys[:i2]
            lo, hi = 0, i2
            while lo < hi:
                mid = (lo + hi) // 2
                if self.keys[mid][1] <= key[1]:
                    hi = mid
                else:
                    lo = mid + 1
            del self.keys[lo:i2], self.points[lo:i2], self._k0[lo:i2]
            self.keys.insert(lo, key)
            self.points.insert(lo, point)
            self._k0.insert(lo, key[0])
            return True
        keep = [
            j
            for j, k in enumerate(self.keys)
            if not all(a <= b for a, b in zip(k, key))
        ]
        if len(keep) != len(self.keys):
            self.keys = [self.keys[j] for j in keep]
            self.points = [self.points[j] for j in keep]
        j = bisect.bisect_left(self.keys, key)
        self.keys.insert(j, key)
        self.points.insert(j, point)
        return True


class Antichain:
    """Canonical finite set of pairwise incomparable points.

    Orientation ``"max"`` reads the elements as the maximal points of a
    lower-closed region, ``"min"`` as the minimal points of an upper-closed
    one. Construction prunes dominated inputs and orders elements
    canonically, so equal sets compare equal.
    """

    __slots__ = ("space", "orientation", "_front")

    def __init__(
        self,
        space: OrderedSpace,
        orientation: str,
        points: Iterable[Sequence[float]] = (),
    ):
        if orientation not in ("max", "min"):
            raise UsageError(f"orientation must be 'max' or 'min', got {orientation!r}")
        self.space = space
        self.orientation = orientation
        self._front = Front(space.dim)
        for p in points:
            p = space.check_point(p)
            self._front.insert(self._key(p), p)

    def _key(self, x: Point) -> Point:
        if self.orientation == "max":
            return tuple(s * c for s, c in zip(self.space.signs, x))
        return tuple(-s * c for s, c in zip(self.space.signs, x))

    @classmethod
    def _wrap(cls, space: OrderedSpace, orientation: str, front: Front) -> "Antichain":
        out = cls.__new__(cls)
        out.space = space
        out.orientation = orientation
        out._front = front
        return out

    @property
    def elements(self) -> tuple[Point, ...]:
        return tuple(self._front.points)

    def __len__(self) -> int:
        return len(self._front)

    def __iter__(self) -> Iterator[Point]:
        return iter(self._front.points)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Antichain)
            and self.space == other.space
            and self.orientation == other.orientation
            and self._front.points == other._front.points
        )

    def __hash__(self) -> int:
        return hash((self.space, self.orientation, tuple(self._front.points)))

    def __repr__(self) -> str:
        return f"Antichain({self.orientation}, {self._front.points})"

    def extremal_of(self, x: Sequence[float]) -> Optional[Point]:
        """Element dominating x (max) or dominated by x (min), if any."""
        x = self.space.check_point(x)
        i = self._front.cover_index(self._key(x))
        return None if i is None else self._front.points[i]

    def insert(self, x: Sequence[float]) -> "Antichain":
        """Antichain of extremal elements of ``self | {x}``."""
        x = self.space.check_point(x)
        front = Front(self.space.dim)
        front.keys = list(self._front.keys)
        front.points = list(self._front.points)
        front._k0 = list(self._front._k0)
        front.insert(self._key(x), x)
        return Antichain._wrap(self.space, self.orientation, front)

    def merge(self, other: "Antichain") -> "Antichain":
        if self.space != other.space or self.orientation != other.orientation:
            raise SpaceMismatch("cannot merge antichains over different orders")
        small, big = sorted((self, other), key=len)
        front = Front(self.space.dim)
        front.keys = list(big._front.keys)
        front.points = list(big._front.points)
        front._k0 = list(big._front._k0)
        for k, p in zip(small._front.keys, small._front.points):
            front.insert(k, p)
        return Antichain._wrap(self.space, self.orientation, front)


def insert_extremal(a: Antichain, x: Sequence[float]) -> Antichain:
    return a.insert(x)


class LowerSet:
    """Lower-closed region: points below a max-antichain, above the floor."""

    __slots__ = ("boundary",)

    def __init__(self, boundary: Antichain):
        if boundary.orientation != "max":
            raise UsageError("a lower set needs a max-oriented boundary antichain")
        self.boundary = boundary

    @classmethod
    def from_points(
        cls, space: OrderedSpace, points: Iterable[Sequence[float]]
    ) -> "LowerSet":
        return cls(Antichain(space, "max", points))

    @property
    def space(self) -> OrderedSpace:
        return self.boundary.space

    def is_empty(self) -> bool:
        return len(self.boundary) == 0

    def witness(self, x: Sequence[float]) -> Optional[Point]:
        """A boundary element dominating x, when x is a member."""
        if not self.space.above_floor(x):
            return None
        return self.boundary.extremal_of(x)

    def contains(self, x: Sequence[float]) -> bool:
        return self.witness(x) is not None

    def union(self, other: "LowerSet") -> "LowerSet":
        return LowerSet(self.boundary.merge(other.boundary))

    def __repr__(self) -> str:
        return f"LowerSet({self.boundary.elements})"


class UpperSet:
    """Upper-closed region: points above a min-antichain."""

    __slots__ = ("boundary",)

    def __init__(self, boundary: Antichain):
        if boundary.orientation != "min":
            raise UsageError("an upper set needs a min-oriented boundary antichain")
        self.boundary = boundary

    @classmethod
    def from_points(
        cls, space: OrderedSpace, points: Iterable[Sequence[float]]
    ) -> "UpperSet":
        return cls(Antichain(space, "min", points))

    @property
    def space(self) -> OrderedSpace:
        return self.boundary.space

    def is_empty(self) -> bool:
        return len(self.boundary) == 0

    def contains(self, x: Sequence[float]) -> bool:
        return self.boundary.extremal_of(x) is not None

    def union(self, other: "UpperSet") -> "UpperSet":
        return UpperSet(self.boundary.merge(other.boundary))

    def __repr__(self) -> str:
        return f"UpperSet({self.boundary.elements})"


def lower_contains(
    lower: LowerSet, x: Sequence[float]
) -> tuple[bool, Optional[Point]]:
    """Membership plus the dominating witness when there is one."""
    w = lower.witness(x)
    return w is not None, w


def upper_contains(upper: UpperSet, x: Sequence[float]) -> bool:
    return upper.contains(x)


def union_lower(l1: LowerSet, l2: LowerSet) -> LowerSet:
    if l1.space != l2.space:
        raise SpaceMismatch("cannot union lower sets over different spaces")
    return l1.union(l2)


def distance_to_lower(lower: LowerSet, x: Sequence[float]) -> float:
    """L-infinity distance from a point to a lower-closed region (0 inside).

    Exact for dominance-style regions: the distance to one element's lower
    cone is its worst positive coordinate deficit, and the region's distance
    is the best over boundary elements.
    """
    signs = lower.space.signs
    if lower.contains(x):
        return 0.0
    best = math.inf
    for m in lower.boundary.elements:
        deficit = max(max(s * (a - b), 0.0) for s, a, b in zip(signs, x, m))
        best = min(best, deficit)
    return best


def distance_to_upper(upper: UpperSet, x: Sequence[float]) -> float:
    """L-infinity distance from a point to an upper-closed region (0 inside)."""
    signs = upper.space.signs
    if upper.contains(x):
        return 0.0
    best = math.inf
    for m in upper.boundary.elements:
        deficit = max(max(s * (b - a), 0.0) for s, a, b in zip(signs, x, m))
        best = min(best, deficit)
    return best


def gap(
    f1: LowerSet,
    f2: UpperSet,
    constraint: LowerSet,
    undecided: Iterable[Box],
) -> float:
    """Largest L-infinity diameter among boxes resolved by neither region.

    A box counts as resolved once it sits entirely inside ``f1`` (its
    order-maximal corner is a member) or entirely inside ``f2`` (its
    order-minimal corner is). Zero when every box is resolved. Callers keep
    undecided boxes inside the constraint's working region.
    """
    signs = constraint.space.signs
    worst = 0.0
    for box in undecided:
        if f1.contains(box.corner_signed_max(signs)):
            continue
        if f2.contains(box.corner_signed_min(signs)):
            continue
        worst = max(worst, box.diameter)
    return worst
