import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moninv.order import (
    Antichain,
    Box,
    DimensionMismatch,
    LowerSet,
    OrderedSpace,
    SpaceMismatch,
    UpperSet,
    UsageError,
    distance_to_lower,
    distance_to_upper,
    gap,
    incomparable,
    insert_extremal,
    leq,
    lower_contains,
    lt,
    union_lower,
    upper_contains,
)

PP = OrderedSpace(2, (1, 1))
MP = OrderedSpace(2, (-1, 1))


class TestLeq:
    def test_componentwise(self):
        assert leq(PP, (1, 2), (1, 3))

    def test_incomparable(self):
        assert not leq(PP, (1, 3), (2, 2))
        assert not leq(PP, (2, 2), (1, 3))
        assert incomparable(PP, (1, 3), (2, 2))

    def test_sign_flip(self):
        assert leq(MP, (5, 1), (3, 2))

    def test_strict(self):
        assert lt(PP, (1, 2), (1, 3))
        assert not lt(PP, (1, 2), (1, 2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            leq(PP, (1, 2, 3), (1, 2))

    def test_duality(self):
        flipped = OrderedSpace(2, (-1, -1))
        for x, y in [((1, 2), (3, 4)), ((1, 4), (2, 3)), ((0, 0), (0, 0))]:
            assert leq(PP, x, y) == leq(flipped, y, x)


class TestAntichain:
    def test_insert_incomparable_kept(self):
        a = Antichain(PP, "max", [(50, 25)])
        b = insert_extremal(a, (22, 32))
        assert set(b.elements) == {(50.0, 25.0), (22.0, 32.0)}

    def test_insert_dominated_dropped(self):
        a = Antichain(PP, "max", [(50, 25)])
        b = insert_extremal(a, (40, 20))
        assert b.elements == ((50.0, 25.0),)

    def test_insert_dominating_replaces(self):
        a = Antichain(PP, "max", [(40, 20)])
        b = insert_extremal(a, (50, 25))
        assert b.elements == ((50.0, 25.0),)

    def test_insert_idempotent(self):
        a = Antichain(PP, "max", [(50, 25), (25, 50)])
        assert insert_extremal(a, (40, 20)) == a
        assert insert_extremal(a, (50, 25)) == a

    def test_min_orientation(self):
        a = Antichain(PP, "min", [(10, 10), (12, 8), (11, 11)])
        assert set(a.elements) == {(10.0, 10.0), (12.0, 8.0)}

    def test_canonical_equality(self):
        a = Antichain(PP, "max", [(1, 2), (2, 1)])
        b = Antichain(PP, "max", [(2, 1), (1, 2)])
        assert a == b
        assert hash(a) == hash(b)

    def test_original_unchanged(self):
        a = Antichain(PP, "max", [(1, 1)])
        a.insert((2, 2))
        assert a.elements == ((1.0, 1.0),)


def _naive_max_antichain(space, points):
    kept = []
    for p in points:
        if any(leq(space, p, q) for q in kept):
            continue
        kept = [q for q in kept if not leq(space, q, p)]
        kept.append(p)
    return set(kept)


@st.composite
def point_lists(draw, dim, max_points=200):
    coords = st.integers(min_value=-30, max_value=30).map(float)
    pt = st.tuples(*([coords] * dim))
    return draw(st.lists(pt, min_size=0, max_size=max_points))


@settings(max_examples=150, deadline=None)
@given(pts=point_lists(2))
def test_antichain_matches_naive_and_is_incomparable(pts):
    ac = Antichain(PP, "max", pts)
    assert set(ac.elements) == _naive_max_antichain(PP, [tuple(map(float, p)) for p in pts])
    elems = ac.elements
    for i, p in enumerate(elems):
        for q in elems[i + 1 :]:
            assert incomparable(PP, p, q)


@settings(max_examples=60, deadline=None)
@given(pts=point_lists(3, max_points=60))
def test_antichain_incomparable_3d(pts):
    space = OrderedSpace(3, (1, -1, 1))
    ac = Antichain(space, "max", pts)
    elems = ac.elements
    for i, p in enumerate(elems):
        for q in elems[i + 1 :]:
            assert incomparable(space, p, q)
    for p in pts:
        assert ac.extremal_of(p) is not None


class TestLowerSet:
    def setup_method(self):
        self.space = OrderedSpace(
            2, (1, 1), base_box=Box((0, 0), (60, 60)), floor=(0.0, 0.0)
        )
        self.L = LowerSet.from_points(
            self.space, [(50, 25), (25, 50), (36, 31)]
        )

    def test_contains_with_witness(self):
        ok, w = lower_contains(self.L, (22.7, 32.7))
        assert ok and w == (25.0, 50.0)

    def test_contains_first_witness(self):
        ok, w = lower_contains(self.L, (46.5, 22.9))
        assert ok and w == (50.0, 25.0)

    def test_not_contained(self):
        ok, w = lower_contains(self.L, (51, 1))
        assert not ok and w is None

    def test_boundary_elements_contained(self):
        for m in self.L.boundary.elements:
            assert self.L.contains(m)

    def test_floor_excludes(self):
        assert not self.L.contains((-1.0, 5.0))

    def test_unbounded_floor_dimension(self):
        space = OrderedSpace(2, (1, 1), floor=(None, 0.0))
        L = LowerSet.from_points(space, [(0, 10)])
        assert L.contains((-1e9, 5.0))
        assert not L.contains((-1e9, -0.1))


class TestUpperSet:
    def test_contains(self):
        U = UpperSet.from_points(PP, [(10, 10)])
        assert upper_contains(U, (11, 12))
        assert not upper_contains(U, (9, 20))

    def test_empty(self):
        U = UpperSet.from_points(PP, [])
        assert not upper_contains(U, (0, 0))
        assert U.is_empty()


class TestUnion:
    def test_union_boundaries(self):
        l1 = LowerSet.from_points(PP, [(1, 0)])
        l2 = LowerSet.from_points(PP, [(0, 1)])
        u = union_lower(l1, l2)
        assert set(u.boundary.elements) == {(1.0, 0.0), (0.0, 1.0)}

    def test_union_absorbs(self):
        u = union_lower(
            LowerSet.from_points(PP, [(2, 2)]), LowerSet.from_points(PP, [(1, 1)])
        )
        assert u.boundary.elements == ((2.0, 2.0),)

    def test_union_identity(self):
        u = union_lower(
            LowerSet.from_points(PP, []), LowerSet.from_points(PP, [(3, 3)])
        )
        assert u.boundary.elements == ((3.0, 3.0),)

    def test_space_mismatch(self):
        with pytest.raises(SpaceMismatch):
            union_lower(LowerSet.from_points(PP, []), LowerSet.from_points(MP, []))

    def test_union_is_disjunction_commutative_associative(self):
        import numpy as np

        rng = np.random.default_rng(5)
        sets = [
            LowerSet.from_points(PP, rng.uniform(0, 10, size=(3, 2)))
            for _ in range(4)
        ]
        a, b, c = sets[0], sets[1], sets[2]
        ab = union_lower(a, b)
        ba = union_lower(b, a)
        abc1 = union_lower(ab, c)
        abc2 = union_lower(a, union_lower(b, c))
        for _ in range(1000):
            x = tuple(rng.uniform(-1, 11, size=2))
            want = a.contains(x) or b.contains(x)
            assert ab.contains(x) == want
            assert ba.contains(x) == want
            want3 = want or c.contains(x)
            assert abc1.contains(x) == want3
            assert abc2.contains(x) == want3

    def test_finite_family_disjunction(self):
        import numpy as np

        rng = np.random.default_rng(11)
        for _ in range(20):
            family = [
                LowerSet.from_points(PP, rng.uniform(0, 5, size=(rng.integers(1, 4), 2)))
                for _ in range(rng.integers(2, 5))
            ]
            total = family[0]
            for member in family[1:]:
                total = union_lower(total, member)
            for _ in range(50):
                x = tuple(rng.uniform(0, 6, size=2))
                assert total.contains(x) == any(m.contains(x) for m in family)


class TestBox:
    def test_diameter_center(self):
        b = Box((0, 0), (2, 1))
        assert b.diameter == 2.0
        assert b.center == (1.0, 0.5)

    def test_invalid(self):
        with pytest.raises(UsageError):
            Box((1, 0), (0, 1))
        with pytest.raises(DimensionMismatch):
            Box((0,), (1, 1))

    def test_split_counts(self):
        b = Box((0, 0), (4, 4))
        kids = b.split((2, 2))
        assert len(kids) == 4
        assert sum(k.diameter for k in kids) == 8.0

    def test_split_degenerate_axis(self):
        b = Box((0, 0), (4, 4))
        kids = b.split((2, 0))
        assert len(kids) == 2

    def test_signed_corners(self):
        b = Box((0, 0), (4, 2))
        assert b.corner_signed_max((1, -1)) == (4.0, 0.0)
        assert b.corner_signed_min((1, -1)) == (0.0, 2.0)


class TestGap:
    def setup_method(self):
        self.X = LowerSet.from_points(PP, [(10, 10)])
        self.f1 = LowerSet.from_points(PP, [(2, 2)])
        self.f2 = UpperSet.from_points(PP, [(8, 8)])

    def test_resolved_box_ignored(self):
        assert gap(self.f1, self.f2, self.X, [Box((0, 0), (1, 1))]) == 0.0

    def test_unresolved_box_diameter(self):
        f1 = LowerSet.from_points(PP, [(0.5, 0.5)])
        assert gap(f1, self.f2, self.X, [Box((0, 0), (2, 1))]) == 2.0

    def test_empty(self):
        assert gap(self.f1, self.f2, self.X, []) == 0.0

    def test_inside_excluded_region(self):
        assert gap(self.f1, self.f2, self.X, [Box((8, 8), (9, 9))]) == 0.0


class TestDistances:
    def test_distance_to_lower(self):
        L = LowerSet.from_points(PP, [(2, 2), (4, 0)])
        assert distance_to_lower(L, (1, 1)) == 0.0
        assert distance_to_lower(L, (3, 3)) == 1.0
        assert distance_to_lower(L, (5, 0)) == 1.0

    def test_distance_to_upper(self):
        U = UpperSet.from_points(PP, [(2, 2)])
        assert distance_to_upper(U, (3, 3)) == 0.0
        assert distance_to_upper(U, (0, 0)) == 2.0

    def test_distance_empty_is_inf(self):
        L = LowerSet.from_points(PP, [])
        assert math.isinf(distance_to_lower(L, (0, 0)))
