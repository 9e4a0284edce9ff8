"""Delimited and JSON encodings with bit-exact float round-trips.

Floats are written with Python's shortest-round-trip repr, so parsing a
file back reproduces the original values bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Optional, Sequence

from .feasibility import FeasibilityCertificate
from .order import Antichain, Box, LowerSet, OrderedSpace, Point


def _header(dim: int) -> list[str]:
    return [f"x{i + 1}" for i in range(dim)]


def points_to_csv(points: Iterable[Point], dim: int) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_header(dim))
    for p in points:
        writer.writerow([repr(float(c)) for c in p])
    return out.getvalue()


def points_from_csv(text: str, dim: Optional[int] = None) -> list[Point]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty point file")
    header = rows[0]
    if dim is None:
        dim = len(header)
    if header != _header(dim):
        raise ValueError(f"expected header {','.join(_header(dim))}, got {','.join(header)}")
    points = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != dim:
            raise ValueError(f"row {i} has {len(row)} fields, expected {dim}")
        points.append(tuple(float(c) for c in row))
    return points


def antichain_to_csv(antichain: Antichain) -> str:
    return points_to_csv(antichain.elements, antichain.space.dim)


def antichain_from_csv(
    space: OrderedSpace, text: str, orientation: str = "max"
) -> Antichain:
    return Antichain(space, orientation, points_from_csv(text, space.dim))


def space_to_json(space: OrderedSpace) -> dict:
    return {
        "dim": space.dim,
        "signs": list(space.signs),
        "base_box": None
        if space.base_box is None
        else {"lo": list(space.base_box.lo), "hi": list(space.base_box.hi)},
        "floor": None if space.floor is None else list(space.floor),
    }


def space_from_json(data: dict) -> OrderedSpace:
    box = data.get("base_box")
    floor = data.get("floor")
    return OrderedSpace(
        data["dim"],
        tuple(data["signs"]),
        base_box=None if box is None else Box(tuple(box["lo"]), tuple(box["hi"])),
        floor=None if floor is None else tuple(floor),
    )


def antichain_to_json(antichain: Antichain) -> dict:
    return {
        "space": space_to_json(antichain.space),
        "orientation": antichain.orientation,
        "elements": [list(p) for p in antichain.elements],
    }


def antichain_from_json(data: dict) -> Antichain:
    return Antichain(
        space_from_json(data["space"]),
        data["orientation"],
        [tuple(p) for p in data["elements"]],
    )


def certificate_to_json(cert: FeasibilityCertificate) -> dict:
    return {
        "x0": list(cert.x0),
        "u_word": [list(u) if isinstance(u, tuple) else u for u in cert.u_word],
        "n_steps": cert.n_steps,
        "layers": [[list(p) for p in layer] for layer in cert.layers],
        "eps_n": cert.eps_n,
        "gamma": None if cert.gamma == float("inf") else cert.gamma,
    }


def certificate_from_json(data: dict) -> FeasibilityCertificate:
    gamma = data["gamma"]
    return FeasibilityCertificate(
        x0=tuple(data["x0"]),
        u_word=tuple(tuple(u) if isinstance(u, list) else u for u in data["u_word"]),
        n_steps=data["n_steps"],
        layers=tuple(tuple(tuple(p) for p in layer) for layer in data["layers"]),
        eps_n=data["eps_n"],
        gamma=float("inf") if gamma is None else gamma,
    )


def tube_to_csv(layers: Sequence[Sequence[Point]], dim: int) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["step"] + _header(dim))
    for k, layer in enumerate(layers):
        for p in layer:
            writer.writerow([k] + [repr(float(c)) for c in p])
    return out.getvalue()


def trajectories_to_csv(trajectories: Sequence[Sequence[Point]], dim: int) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["run", "step"] + _header(dim))
    for run, traj in enumerate(trajectories):
        for k, p in enumerate(traj):
            writer.writerow([run, k] + [repr(float(c)) for c in p])
    return out.getvalue()


def boundary_polyline(lower: LowerSet) -> list[Point]:
    """Staircase vertices of a planar lower set's boundary, box to box."""
    space = lower.space
    if space.dim != 2:
        raise ValueError("boundary polylines are only defined in the plane")
    signs = space.signs
    pts = sorted(
        lower.boundary.elements, key=lambda p: (signs[0] * p[0], signs[1] * p[1])
    )
    if not pts:
        return []
    box = space.base_box
    verts: list[Point] = []
    if box is not None:
        smin = box.corner_signed_min(signs)
        verts.append((smin[0], pts[0][1]))
    for i, p in enumerate(pts):
        verts.append(p)
        if i + 1 < len(pts):
            nxt = pts[i + 1]
            verts.append((nxt[0], p[1]))
    if box is not None:
        smin = box.corner_signed_min(signs)
        verts.append((pts[-1][0], smin[1]))
    return verts


def result_to_json(result) -> dict:
    """Full synthesis outcome: regions, gap, counters, unresolved boxes."""
    return {
        "status": result.status,
        "epsilon": result.epsilon,
        "gap_final": result.gap_final,
        "eps_optimal_claim": result.eps_claim,
        "invariant": antichain_to_json(result.invariant.boundary),
        "proven": antichain_to_json(result.proven.boundary),
        "excluded": antichain_to_json(result.excluded.boundary),
        "undecided": [
            {"lo": list(b.lo), "hi": list(b.hi), "stalled": stalled}
            for b, stalled in result.undecided
        ],
        "counters": dict(result.counters),
    }


def dump_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
