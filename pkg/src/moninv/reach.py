"""Forward reach layers under worst-case disturbances, with dominance pruning.

Each layer keeps only the order-maximal image points. For state-monotone
systems a dropped point's successors stay below the kept point's
successors, so every downstream predicate used here (containment in a
lower-closed region, intersection with an upper-closed one) is decided by
the pruned frontier alone. This bounds layer size by the antichain width
instead of growing exponentially in the disturbance branching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .dynamics import InputLabel, MonotoneSystem, step
from .order import Antichain, LowerSet, Point


@dataclass(frozen=True)
class ReachLayer:
    k: int
    frontier: Antichain
    raw_count: int

    def points(self) -> tuple[Point, ...]:
        return self.frontier.elements


def initial_layer(sys: MonotoneSystem, x0: Sequence[float]) -> ReachLayer:
    x0 = sys.space.check_point(x0)
    return ReachLayer(0, Antichain(sys.space, "max", [x0]), 1)


def frontier_step(
    sys: MonotoneSystem, points: Sequence[Point], u: InputLabel
) -> tuple[tuple[Point, ...], int]:
    """Pruned successor frontier of a point set under one input."""
    images = [step(sys, p, u, d) for p in points for d in sys.dist_points]
    pruned = Antichain(sys.space, "max", images)
    return pruned.elements, len(images)


def propagate(sys: MonotoneSystem, layer: ReachLayer, u: InputLabel) -> ReachLayer:
    images = [
        step(sys, p, u, d) for p in layer.frontier.elements for d in sys.dist_points
    ]
    return ReachLayer(layer.k + 1, Antichain(sys.space, "max", images), len(images))


def reach_tube(
    sys: MonotoneSystem, x0: Sequence[float], u_word: Sequence[InputLabel]
) -> list[ReachLayer]:
    """Layers 0..len(u_word); layer 0 is the initial state alone."""
    layers = [initial_layer(sys, x0)]
    for u in u_word:
        layers.append(propagate(sys, layers[-1], u))
    return layers


def layer_within(layer: ReachLayer, region: LowerSet) -> bool:
    """Whole-layer containment, decided on the pruned frontier."""
    return all(region.contains(p) for p in layer.frontier.elements)


class ClosedLoopError(RuntimeError):
    """Controller query failed during simulation.

    Carries the failing step, the state, and the trajectory up to it.
    """

    def __init__(self, k: int, state: Point, cause: Exception, trajectory=None):
        super().__init__(f"controller failed at step {k}, state {state}: {cause}")
        self.k = k
        self.state = state
        self.trajectory = list(trajectory) if trajectory is not None else [state]


def simulate_closed_loop(
    sys: MonotoneSystem,
    controller: Callable[[Point], InputLabel],
    x0: Sequence[float],
    d_word: Sequence[Sequence[float]],
    steps: int,
) -> list[Point]:
    """Trajectory of length steps+1 under a state-feedback controller.

    Disturbances are taken from ``d_word`` (anything inside the declared
    disturbance region, not just the worst-case points).
    """
    if steps > len(d_word):
        raise ValueError(f"need {steps} disturbances, got {len(d_word)}")
    x = sys.space.check_point(x0)
    trajectory = [x]
    for k in range(steps):
        try:
            u = controller(x)
        except Exception as exc:
            raise ClosedLoopError(k, x, exc, trajectory) from exc
        x = step(sys, x, u, d_word[k])
        trajectory.append(x)
    return trajectory
