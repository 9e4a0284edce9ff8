import pytest

from moninv import LowerSet, MonotoneSystem
from moninv.dynamics import builtin_acc, builtin_switched2d
from moninv.order import Box, OrderedSpace

# Planar switched plant: two modes, each unstable alone; worst-case
# disturbance (0.2, 0.2).
A1 = ((1.2, 0.1), (0.2, 0.5))
A2 = ((0.4, 0.1), (0.1, 1.1))
K_POINTS = ((50.0, 25.0), (25.0, 50.0), (36.0, 31.0))


def switched_step(a_mats, x, u, d):
    m = a_mats[u]
    n = len(x)
    return tuple(
        sum(m[i][j] * x[j] for j in range(n)) + d[i] for i in range(n)
    )


@pytest.fixture(scope="session")
def switched():
    return builtin_switched2d()


@pytest.fixture(scope="session")
def acc():
    return builtin_acc()


@pytest.fixture
def switched_k(switched):
    return LowerSet.from_points(switched.system.space, K_POINTS)


def make_1d(
    f,
    x_max,
    box,
    floor=None,
    inputs=(0,),
    dist_points=((0.0,),),
    mono="SM",
    **kwargs,
):
    """Small helper for scalar test plants."""
    space = OrderedSpace(
        1,
        (1,),
        base_box=Box((box[0],), (box[1],)),
        floor=None if floor is None else (floor,),
    )
    system = MonotoneSystem(
        space=space,
        inputs=tuple(inputs),
        dist_points=tuple(dist_points),
        dynamics=f,
        mono_class=mono,
        **kwargs,
    )
    constraint = LowerSet.from_points(space, [(x_max,)])
    return system, constraint
