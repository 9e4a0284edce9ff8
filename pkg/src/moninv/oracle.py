"""Grid-based safety fixed point, used to cross-check the antichain pipeline.

The working box is latticed at a fixed resolution; a lattice point stays
alive while some admissible input maps it below a still-alive lattice
point for every worst-case disturbance. Monotonicity makes each cell's
order-maximal corner an upper bound for the whole cell, so the surviving
corners' lower closure under-approximates the maximal invariant. The
implementation is deliberately independent of the antichain search: plain
arrays, Jacobi sweeps, no tube reasoning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .dynamics import MonotoneSystem, step
from .order import Antichain, Front, LowerSet, Point, UsageError, distance_to_lower


@dataclass(frozen=True)
class GridRun:
    invariant: LowerSet
    evaluations: int
    sweeps: int
    alive_count: int
    shape: tuple[int, ...]
    resolution: tuple[float, ...]


def run_grid_fixed_point(
    sys: MonotoneSystem,
    constraint: LowerSet,
    resolution,
    *,
    include_min_faces: bool = True,
) -> GridRun:
    """Safety fixed point on the lattice of cell corners.

    ``include_min_faces`` keeps the degenerate cells on the box's
    order-minimal faces in the lattice. Dynamics whose rest states live on
    such a face (a clamped velocity, say) have no fixed point among
    interior cell corners, and without the face layer the whole abstraction
    drains empty; the extra corners only ever enlarge the sound result.
    """
    space = sys.space
    box = space.base_box
    if box is None:
        raise UsageError("the grid oracle needs a base box")
    dim = space.dim
    if np.isscalar(resolution):
        res = (float(resolution),) * dim
    else:
        res = tuple(float(r) for r in resolution)
    if len(res) != dim or any(r <= 0 for r in res):
        raise UsageError(f"resolution must be positive per dimension, got {res}")

    signs = space.signs
    axes = []
    for i in range(dim):
        slo = min(signs[i] * box.lo[i], signs[i] * box.hi[i])
        shi = max(signs[i] * box.lo[i], signs[i] * box.hi[i])
        n = max(1, math.ceil((shi - slo) / res[i] - 1e-12))
        pts = [slo + k * res[i] for k in range(n)] + [shi]
        if not include_min_faces:
            pts = pts[1:]
        axes.append(np.asarray(pts))
    shape = tuple(len(a) for a in axes)
    grids = np.meshgrid(*axes, indexing="ij")
    signed_pts = np.stack([g.ravel() for g in grids], axis=1)
    raw_pts = signed_pts * np.asarray(signs)[None, :]
    n_pts = raw_pts.shape[0]

    alive = np.fromiter(
        (constraint.contains(tuple(p)) for p in raw_pts), dtype=bool, count=n_pts
    ).reshape(shape)

    inputs = sys.min_inputs
    n_u, n_d = len(inputs), len(sys.dist_points)
    # Flat lattice index of the smallest corner dominating each image point,
    # or -1 when the image escapes the box upward.
    targets = np.empty((n_pts, n_u, n_d), dtype=np.int64)
    strides = np.array(
        [int(np.prod(shape[i + 1 :], dtype=np.int64)) for i in range(dim)]
    )
    for j, p in enumerate(raw_pts):
        xp = tuple(p)
        for a, u in enumerate(inputs):
            for b, d in enumerate(sys.dist_points):
                img = step(sys, xp, u, d)
                flat = 0
                for i in range(dim):
                    k = int(np.searchsorted(axes[i], signs[i] * img[i], side="left"))
                    if k >= shape[i]:
                        flat = -1
                        break
                    flat += k * strides[i]
                targets[j, a, b] = flat

    valid = targets >= 0
    safe_targets = np.where(valid, targets, 0)
    evaluations = 0
    sweeps = 0
    while True:
        sweeps += 1
        evaluations += int(alive.sum()) * n_u * n_d
        suffix = alive.copy()
        for axis in range(dim):
            suffix = np.flip(
                np.logical_or.accumulate(np.flip(suffix, axis), axis), axis
            )
        dominated = valid & suffix.ravel()[safe_targets]
        ok = dominated.all(axis=2).any(axis=1).reshape(shape)
        alive_next = alive & ok
        if np.array_equal(alive_next, alive):
            break
        alive = alive_next

    alive_flat = alive.ravel()
    front = Front(dim)
    if dim == 2:
        n0, n1 = shape
        best = -1
        for i0 in range(n0 - 1, -1, -1):
            row = np.flatnonzero(alive[i0])
            if row.size and row[-1] > best:
                best = int(row[-1])
                key = (float(axes[0][i0]), float(axes[1][best]))
                front.insert(key, (signs[0] * key[0], signs[1] * key[1]))
    else:
        for j in np.flatnonzero(alive_flat):
            key = tuple(float(c) for c in signed_pts[j])
            front.insert(key, tuple(float(c) for c in raw_pts[j]))
    boundary = Antichain._wrap(space, "max", front)
    return GridRun(
        invariant=LowerSet(boundary),
        evaluations=evaluations,
        sweeps=sweeps,
        alive_count=int(alive_flat.sum()),
        shape=shape,
        resolution=res,
    )


def grid_fixed_point(
    sys: MonotoneSystem, constraint: LowerSet, resolution
) -> LowerSet:
    return run_grid_fixed_point(sys, constraint, resolution).invariant


@dataclass(frozen=True)
class ComparisonReport:
    samples: int
    a_minus_b: int
    b_minus_a: int
    max_boundary_gap: float


def compare(
    inv_a: LowerSet, inv_b: LowerSet, samples: int, seed: int = 0
) -> ComparisonReport:
    """Membership disagreement statistics plus a boundary discrepancy bound.

    Memberships are compared on uniform samples from the working box. The
    boundary gap is measured along axis-parallel rays: on each ray the two
    sets' membership transitions are bisected and each transition point's
    order-compatible distance to the other set is taken, so a near-flat
    boundary segment is charged its true offset rather than the ray-length
    it shadows. The largest value over all rays and axes is reported.
    """
    if inv_a.space != inv_b.space:
        raise UsageError("compared regions must share a space")
    space = inv_a.space
    box = space.base_box
    if box is None:
        raise UsageError("comparison needs a base box")
    rng = np.random.default_rng(seed)
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    a_only = b_only = 0
    for _ in range(samples):
        x = tuple(rng.uniform(lo, hi))
        ina, inb = inv_a.contains(x), inv_b.contains(x)
        a_only += ina and not inb
        b_only += inb and not ina
    rays = max(2, min(128, samples // 16))
    worst = 0.0
    for axis in range(space.dim):
        s = space.signs[axis]
        slo = min(s * box.lo[axis], s * box.hi[axis])
        shi = max(s * box.lo[axis], s * box.hi[axis])
        for _ in range(rays):
            base = [rng.uniform(l, h) for l, h in zip(box.lo, box.hi)]

            def edge(region) -> float:
                def member(xi: float) -> bool:
                    pt = list(base)
                    pt[axis] = s * xi
                    return region.contains(tuple(pt))

                if not member(slo):
                    return slo
                if member(shi):
                    return shi
                a, b = slo, shi
                for _ in range(60):
                    mid = 0.5 * (a + b)
                    if member(mid):
                        a = mid
                    else:
                        b = mid
                return a

            e_a, e_b = edge(inv_a), edge(inv_b)
            if e_a == e_b:
                continue
            # the farther transition point lies outside the nearer set;
            # charge its distance to that set
            pt = list(base)
            pt[axis] = s * max(e_a, e_b)
            nearer = inv_a if e_a < e_b else inv_b
            worst = max(worst, distance_to_lower(nearer, tuple(pt)))
    return ComparisonReport(samples, a_only, b_only, worst)
