import dataclasses

import numpy as np
import pytest

from moninv.dynamics import MonotoneSystem
from moninv.feasibility import Unsafe
from moninv.invariance import (
    ControllerDomainError,
    PreconditionError,
    check_containment_lemma,
    extract_controller,
    synthesize,
    verify_invariant,
)
from moninv.order import Box, LowerSet, OrderedSpace, UsageError
from moninv.reach import simulate_closed_loop

from conftest import A1, A2, make_1d, switched_step


class TestVerify:
    def test_switched_invariant(self, switched, switched_k):
        report = verify_invariant(switched.system, switched.constraint, switched_k)
        assert report.is_invariant
        assert report.states_checked == 3
        assert report.successor_evaluations == 6
        chosen = {c.state: c.chosen_input for c in report.per_state}
        assert chosen == {(50.0, 25.0): 2, (25.0, 50.0): 1, (36.0, 31.0): 1}
        frontiers = {
            c.state: dict(c.successors)[c.chosen_input][0] for c in report.per_state
        }
        assert frontiers[(50.0, 25.0)] == (22.7, 32.7)
        assert frontiers[(25.0, 50.0)] == (35.2, 30.2)
        assert frontiers[(36.0, 31.0)] == (46.5, 22.9)

    def test_negative_control(self, switched):
        K = LowerSet.from_points(switched.system.space, [(50, 25), (25, 50)])
        report = verify_invariant(switched.system, switched.constraint, K)
        assert not report.is_invariant
        witness = report.witness()
        assert witness.state == (25.0, 50.0)
        succ = dict(witness.successors)
        assert succ[1][0] == switched_step({1: A1, 2: A2}, (25.0, 50.0), 1, (0.2, 0.2))
        assert succ[2][0] == switched_step({1: A1, 2: A2}, (25.0, 50.0), 2, (0.2, 0.2))
        assert succ[1][0] == pytest.approx((35.2, 30.2), abs=1e-9)
        assert succ[2][0] == pytest.approx((15.2, 57.7), abs=1e-9)
        assert witness.chosen_input is None
        # the other corner still admits a mode
        ok = {c.state: c.chosen_input for c in report.per_state}
        assert ok[(50.0, 25.0)] == 2

    def test_origin_with_zero_disturbance(self, switched):
        sys = dataclasses.replace(switched.system, dist_points=((0.0, 0.0),))
        K = LowerSet.from_points(sys.space, [(0.0, 0.0)])
        report = verify_invariant(sys, switched.constraint, K)
        assert report.is_invariant

    def test_candidate_outside_constraint(self, switched):
        K = LowerSet.from_points(switched.system.space, [(61.0, 1.0)])
        with pytest.raises(PreconditionError, match="61"):
            verify_invariant(switched.system, switched.constraint, K)

    def test_jobs_parallel_same_answer(self, switched, switched_k):
        seq = verify_invariant(switched.system, switched.constraint, switched_k)
        par = verify_invariant(switched.system, switched.constraint, switched_k, jobs=4)
        assert seq == par

    def test_min_input_reduction_on_acc(self, acc):
        # a rest corner is invariant; the CDSM scan stops at the minimal input
        K = LowerSet.from_points(acc.system.space, [(-60.0, 0.0)])
        report = verify_invariant(acc.system, acc.constraint, K)
        assert report.is_invariant
        assert report.successor_evaluations == 1


class TestSynthesizeSmall:
    def test_whole_region_invariant(self):
        sys, X = make_1d(lambda x, u, d: (0.5 * x[0] + u,), 1.0, (0, 1), floor=0.0)
        result = synthesize(sys, X, 0.25, 4)
        assert result.status == "complete"
        assert result.invariant.boundary.elements == X.boundary.elements
        assert result.gap_final == 0.0

    def test_empty_invariant(self):
        sys, X = make_1d(lambda x, u, d: (x[0] + 1.0,), 1.0, (0, 1), floor=0.0)
        result = synthesize(sys, X, 0.25, 4)
        assert result.status == "complete"
        assert result.invariant.is_empty()
        # the constraint corner is excluded via a chained certificate
        assert any(isinstance(v, Unsafe) for v in result.certificates.values())

    def test_bad_epsilon(self, switched):
        with pytest.raises(UsageError):
            synthesize(switched.system, switched.constraint, -1.0, 4)

    def test_gap_trace_nonincreasing(self, switched):
        result = synthesize(switched.system, switched.constraint, 2.0, switched.n_max)
        trace = result.gap_trace
        assert all(a >= b for a, b in zip(trace, trace[1:]))
        assert result.gap_final <= 2.0


@pytest.fixture(scope="module")
def switched_result(switched):
    return synthesize(switched.system, switched.constraint, 1.0, switched.n_max)


class TestSynthesizeSoundness:
    def test_output_verifies(self, switched, switched_result):
        report = verify_invariant(
            switched.system, switched.constraint, switched_result.invariant
        )
        assert report.is_invariant

    def test_regions_disjoint_on_samples(self, switched, switched_result):
        rng = np.random.default_rng(23)
        box = switched.system.space.base_box
        proven, excluded = switched_result.proven, switched_result.excluded
        for _ in range(10_000):
            x = tuple(rng.uniform(box.lo, box.hi))
            assert not (proven.contains(x) and excluded.contains(x))

    def test_invariant_lower_closed(self, switched, switched_result):
        rng = np.random.default_rng(29)
        K = switched_result.invariant
        box = switched.system.space.base_box
        hits = 0
        while hits < 1000:
            y = tuple(rng.uniform(box.lo, box.hi))
            if not K.contains(y):
                continue
            hits += 1
            frac = rng.uniform(0, 1, size=2)
            x = tuple(f * c for f, c in zip(frac, y))
            assert K.contains(x)

    def test_certificates_cover_proven_boundary(self, switched_result):
        from moninv.feasibility import Feasible

        tubes = [
            p
            for v in switched_result.certificates.values()
            if isinstance(v, Feasible)
            for layer in v.certificate.layers[:-1]
            for p in layer
        ]
        tube_set = set(tubes)
        for m in switched_result.proven.boundary.elements:
            assert m in tube_set

    def test_excluded_boundary_has_certificates(self, switched_result):
        for m in switched_result.excluded.boundary.elements:
            v = switched_result.certificates.get(m)
            assert isinstance(v, Unsafe)

    def test_gap_operation_agrees_with_result(self, switched, switched_result):
        from moninv.order import gap

        boxes = [b for b, _ in switched_result.undecided]
        recomputed = gap(
            switched_result.proven,
            switched_result.excluded,
            switched.constraint,
            boxes,
        )
        assert recomputed == switched_result.gap_final

    def test_closed_loop_stays_inside(self, switched, switched_result):
        sys = switched.system
        K = switched_result.invariant
        controller = extract_controller(sys, K)
        rng = np.random.default_rng(31)
        box = sys.space.base_box
        starts = []
        while len(starts) < 20:
            x = tuple(rng.uniform(box.lo, box.hi))
            if K.contains(x):
                starts.append(x)
        for x0 in starts:
            for _ in range(5):
                d_word = [tuple(rng.uniform(0, 0.2, 2)) for _ in range(200)]
                traj = simulate_closed_loop(sys, controller, x0, d_word, 200)
                assert all(K.contains(p) for p in traj)


class TestController:
    def test_first_admissible_input(self, switched, switched_k):
        controller = extract_controller(switched.system, switched_k)
        assert controller((50, 25)) == 2
        assert controller((0, 0)) == 1  # mode 1 already stays inside
        assert controller.table  # memoized

    def test_domain_error(self, switched, switched_k):
        controller = extract_controller(switched.system, switched_k)
        with pytest.raises(ControllerDomainError):
            controller((60, 60))


class TestContainmentLemma:
    def test_switched_case(self, switched, switched_k):
        sys = switched.system
        assert check_containment_lemma(
            sys, switched.constraint,
            u_sub=(1, 2), u_sup=(1, 2),
            d_sub=[(0.2, 0.2), (0.3, 0.3)], d_sup=[(0.2, 0.2)],
            candidate=switched_k,
        )

    def test_reflexive(self, switched, switched_k):
        sys = switched.system
        assert check_containment_lemma(
            sys, switched.constraint,
            u_sub=sys.inputs, u_sup=sys.inputs,
            d_sub=sys.dist_points, d_sup=sys.dist_points,
            candidate=switched_k,
        )

    def test_precondition(self, switched, switched_k):
        with pytest.raises(UsageError):
            check_containment_lemma(
                switched.system, switched.constraint,
                u_sub=(1, 2, 3), u_sup=(1, 2),
                d_sub=switched.system.dist_points, d_sup=switched.system.dist_points,
                candidate=switched_k,
            )

    def test_random_scalar_sweep(self):
        rng = np.random.default_rng(37)
        for _ in range(20):
            slope = float(rng.uniform(0.2, 1.1))
            gain = float(rng.uniform(0.0, 0.5))
            space = OrderedSpace(1, (1,), base_box=Box((0,), (5,)), floor=(0.0,))

            def f(x, u, d, slope=slope, gain=gain):
                return (slope * x[0] + gain * u + d[0],)

            sys = MonotoneSystem(
                space=space, inputs=(0.0, 1.0), dist_points=((0.2,), (0.4,)),
                dynamics=f, mono_class="CSM", input_signs=(1,),
            )
            X = LowerSet.from_points(space, [(4.0,)])
            K = LowerSet.from_points(space, [(float(rng.uniform(0.5, 4.0)),)])
            assert check_containment_lemma(
                sys, X,
                u_sub=(0.0,), u_sup=(0.0, 1.0),
                d_sub=((0.2,), (0.4,)), d_sup=((0.2,),),
                candidate=K,
            )


class TestStalledOutcome:
    def test_undecided_center_stalls(self):
        # pure drift with no room below: the box center never resolves
        space = OrderedSpace(1, (1,), base_box=Box((0.0,), (1.0,)), floor=(0.0,))
        sys = MonotoneSystem(
            space=space, inputs=(0,), dist_points=((0.0,),),
            dynamics=lambda x, u, d: (x[0] * 1.02,), mono_class="SM",
        )
        X = LowerSet.from_points(space, [(1.0,)])
        result = synthesize(sys, X, 0.25, 3)
        assert result.status == "stalled"
        assert any(stalled for _, stalled in result.undecided)
        assert not result.eps_claim
