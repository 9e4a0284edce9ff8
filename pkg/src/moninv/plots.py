"""Figure rendering for synthesis and simulation outputs (planar systems).

Everything draws to files through the Agg backend; nothing here opens a
window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

from .order import LowerSet
from .serialize import boundary_polyline

_FILL = "#aecde8"
_EDGE = "#2060a0"
_WARN = "#c23b22"
_STALL = "#f2c94d"


def _staircase_xy(lower: LowerSet):
    verts = boundary_polyline(lower)
    if not verts:
        return [], []
    return [v[0] for v in verts], [v[1] for v in verts]


def _fill_region(ax, lower: LowerSet, xs, ys, **kwargs):
    # close the polygon through the box's order-minimal corner so the fill
    # covers the whole staircase region
    box = lower.space.base_box
    if box is None:
        ax.fill(xs + [xs[0]], ys + [ys[0]], **kwargs)
        return
    corner = box.corner_signed_min(lower.space.signs)
    ax.fill(xs + [corner[0], xs[0]], ys + [corner[1], ys[0]], **kwargs)


def plot_invariant_region(result, sys, path: str) -> None:
    """Invariant, excluded points, and unresolved boxes on one figure."""
    space = sys.space
    if space.dim != 2:
        raise ValueError("region plots are only available for planar systems")
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    box = space.base_box
    if box is not None:
        ax.set_xlim(box.lo[0], box.hi[0])
        ax.set_ylim(box.lo[1], box.hi[1])
    xs, ys = _staircase_xy(result.invariant)
    if xs:
        _fill_region(ax, result.invariant, xs, ys, color=_FILL, alpha=0.8,
                     label="invariant", zorder=1)
        ax.plot(xs, ys, color=_EDGE, lw=1.4, zorder=3)
    exs = [p[0] for p in result.excluded.boundary.elements]
    eys = [p[1] for p in result.excluded.boundary.elements]
    if exs:
        ax.plot(exs, eys, ".", ms=3, color=_WARN, label="excluded", zorder=2)
    for b, stalled in result.undecided:
        ax.add_patch(Rectangle(
            (b.lo[0], b.lo[1]), b.hi[0] - b.lo[0], b.hi[1] - b.lo[1],
            fill=stalled, facecolor=_STALL if stalled else "none",
            edgecolor="#999999", lw=0.4, zorder=2,
        ))
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(f"invariant region (gap {result.gap_final:.4g})")
    if xs or exs:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trajectories(trajectories, invariant: LowerSet, path: str) -> None:
    space = invariant.space
    if space.dim != 2:
        raise ValueError("trajectory plots are only available for planar systems")
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    box = space.base_box
    if box is not None:
        ax.set_xlim(box.lo[0], box.hi[0])
        ax.set_ylim(box.lo[1], box.hi[1])
    xs, ys = _staircase_xy(invariant)
    if xs:
        _fill_region(ax, invariant, xs, ys, color=_FILL, alpha=0.8, zorder=1)
        ax.plot(xs, ys, color=_EDGE, lw=1.4, zorder=2)
    for traj in trajectories:
        ax.plot([p[0] for p in traj], [p[1] for p in traj],
                lw=0.7, alpha=0.7, color="#30609f", zorder=3)
        ax.plot(traj[0][0], traj[0][1], "o", ms=3, color=_WARN, zorder=4)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title("closed-loop trajectories")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
