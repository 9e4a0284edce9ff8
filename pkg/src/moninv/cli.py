"""Command-line interface.

Four subcommands: ``verify`` a candidate invariant, ``synth``esize one,
``simulate`` the closed loop under an extracted controller, ``validate``
the declared monotonicity class by sampling. Every command prints one JSON
report to stdout; ``--out DIR`` additionally writes CSV data files and,
for planar systems, rendered figures.

Exit codes: 0 success, 1 property failure (verification refuted, a
trajectory escaped, a monotonicity counterexample), 2 usage/config errors,
3 synthesis finished soundly but with stalled boxes left.

All randomness flows from the single ``--seed`` through numpy's PCG64
generator; reports are byte-identical across runs up to the wall-time
field.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys as _sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, LoadedModel, load_config
from .dynamics import validate_monotonicity
from .feasibility import Feasible, Unsafe
from .invariance import (
    PreconditionError,
    extract_controller,
    synthesize,
    verify_invariant,
)
from .order import LowerSet, UsageError
from .reach import ClosedLoopError, simulate_closed_loop
from . import serialize

REPORT_SCHEMA = "moninv-report/1"


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _label(u):
    return list(u) if isinstance(u, tuple) else u


def _report(command: str, model: LoadedModel, seed, started: float, payload: dict) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "command": command,
        "config": model.name,
        "config_digest": _digest(model.text),
        "seed": seed,
        "wall_time_s": round(time.perf_counter() - started, 6),
        **payload,
    }


def _emit(report: dict) -> None:
    _sys.stdout.write(serialize.dump_json(report))


def _load(path: str) -> LoadedModel:
    text = Path(path).read_text()
    return load_config(text, source=path)


def _outdir(args) -> Path | None:
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_verify(args) -> int:
    started = time.perf_counter()
    model = _load(args.config)
    space = model.system.space
    try:
        antichain = serialize.antichain_from_csv(
            space, Path(args.invariant).read_text()
        )
    except ValueError as exc:
        raise ConfigError(str(exc), source=args.invariant)
    candidate = LowerSet(antichain)
    report = verify_invariant(model.system, model.constraint, candidate, jobs=args.jobs)
    payload = {
        "is_invariant": report.is_invariant,
        "states_checked": report.states_checked,
        "successor_evaluations": report.successor_evaluations,
        "per_state": [
            {
                "state": list(c.state),
                "chosen_input": None if c.chosen_input is None else _label(c.chosen_input),
                "successors": {
                    json.dumps(_label(u)): [list(p) for p in frontier]
                    for u, frontier in c.successors
                },
            }
            for c in report.per_state
        ],
    }
    out = _outdir(args)
    if out is not None:
        (out / "invariant.csv").write_text(serialize.antichain_to_csv(antichain))
        chosen = [c.state for c in report.per_state if c.chosen_input is not None]
        (out / "verified_states.csv").write_text(
            serialize.points_to_csv(chosen, space.dim)
        )
        if space.dim == 2:
            from .plots import plot_trajectories

            succ = [
                [c.state, p]
                for c in report.per_state
                if c.chosen_input is not None
                for u, frontier in c.successors
                if u == c.chosen_input
                for p in frontier
            ]
            plot_trajectories(succ, candidate, str(out / "verify_region.png"))
    _emit(_report("verify", model, args.seed, started, payload))
    return 0 if report.is_invariant else 1


def cmd_synth(args) -> int:
    started = time.perf_counter()
    model = _load(args.config)
    epsilon = args.epsilon if args.epsilon is not None else model.epsilon
    n_max = args.nmax if args.nmax is not None else model.n_max
    if epsilon <= 0:
        raise ConfigError(f"precision must be positive, got {epsilon}")
    result = synthesize(model.system, model.constraint, epsilon, n_max, seeds=model.seeds)
    payload = {
        "status": result.status,
        "epsilon": epsilon,
        "n_max": n_max,
        "gap_final": result.gap_final,
        "eps_optimal_claim": result.eps_claim,
        "invariant_size": len(result.invariant.boundary),
        "excluded_size": len(result.excluded.boundary),
        "undecided_boxes": len(result.undecided),
        "stalled_boxes": sum(1 for _, s in result.undecided if s),
        "counters": result.counters,
    }
    out = _outdir(args)
    if out is not None:
        (out / "K.csv").write_text(serialize.antichain_to_csv(result.invariant.boundary))
        (out / "F1.csv").write_text(serialize.antichain_to_csv(result.proven.boundary))
        (out / "F2.csv").write_text(serialize.antichain_to_csv(result.excluded.boundary))
        (out / "result.json").write_text(
            serialize.dump_json(serialize.result_to_json(result))
        )
        certs = {}
        for x, verdict in result.certificates.items():
            key = ",".join(repr(c) for c in x)
            if isinstance(verdict, Feasible):
                certs[key] = {"verdict": "feasible",
                              **serialize.certificate_to_json(verdict.certificate)}
            elif isinstance(verdict, Unsafe):
                certs[key] = {
                    "verdict": "unsafe",
                    "horizon": verdict.certificate.horizon,
                    "witnesses": [
                        {
                            "u_word": [_label(u) for u in w.u_word],
                            "d_word": [list(d) for d in w.d_word],
                            "hit_step": w.hit_step,
                            "point": list(w.point),
                        }
                        for w in verdict.certificate.witnesses
                    ],
                }
            else:
                certs[key] = {"verdict": "undecided", "horizon": verdict.horizon}
        (out / "certificates.json").write_text(serialize.dump_json(certs))
        if model.system.space.dim == 2:
            poly = serialize.boundary_polyline(result.invariant)
            (out / "boundary_polyline.csv").write_text(
                serialize.points_to_csv(poly, 2)
            )
            from .plots import plot_invariant_region

            plot_invariant_region(result, model.system, str(out / "invariant_region.png"))
    _emit(_report("synth", model, args.seed, started, payload))
    return 0 if result.status == "complete" else 3


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    model = _load(args.config)
    system = model.system
    space = system.space
    try:
        antichain = serialize.antichain_from_csv(space, Path(args.invariant).read_text())
    except ValueError as exc:
        raise ConfigError(str(exc), source=args.invariant)
    candidate = LowerSet(antichain)
    check = verify_invariant(system, model.constraint, candidate)
    if not check.is_invariant:
        raise PreconditionError(
            "the provided set fails invariance verification; refusing to simulate"
        )
    seed = args.seed if args.seed is not None else model.seed
    rng = np.random.default_rng(seed)
    box = space.base_box
    starts = []
    tries = 0
    while len(starts) < args.runs:
        tries += 1
        if tries > 200000:
            raise UsageError("could not sample start states inside the invariant")
        x = tuple(rng.uniform(box.lo, box.hi))
        if candidate.contains(x):
            starts.append(x)
    controller = extract_controller(system, candidate)
    dist_box = system.dist_box
    trajectories = []
    escaped = None
    for run, x0 in enumerate(starts):
        if dist_box is not None:
            d_word = [tuple(rng.uniform(dist_box.lo, dist_box.hi)) for _ in range(args.steps)]
        else:
            d_word = [
                system.dist_points[rng.integers(len(system.dist_points))]
                for _ in range(args.steps)
            ]
        try:
            traj = simulate_closed_loop(system, controller, x0, d_word, args.steps)
        except ClosedLoopError as exc:
            # a query outside the invariant means the run already escaped
            traj = exc.trajectory
        trajectories.append(traj)
        if escaped is None:
            bad = next((k for k, p in enumerate(traj) if not candidate.contains(p)), None)
            if bad is not None:
                escaped = {"run": run, "step": bad, "state": list(traj[bad])}
    payload = {
        "runs": args.runs,
        "steps": args.steps,
        "escaped": escaped,
        "all_contained": escaped is None,
    }
    out = _outdir(args)
    if out is not None:
        (out / "trajectories.csv").write_text(
            serialize.trajectories_to_csv(trajectories, space.dim)
        )
        if escaped is not None:
            (out / "escape.csv").write_text(
                serialize.trajectories_to_csv([trajectories[escaped["run"]]], space.dim)
            )
        if space.dim == 2:
            from .plots import plot_trajectories

            plot_trajectories(trajectories, candidate, str(out / "trajectories.png"))
    _emit(_report("simulate", model, seed, started, payload))
    return 0 if escaped is None else 1


def cmd_validate(args) -> int:
    started = time.perf_counter()
    model = _load(args.config)
    seed = args.seed if args.seed is not None else model.seed
    report = validate_monotonicity(model.system, args.samples, seed)
    payload = {
        "mono_class": model.system.mono_class,
        "class_confirmed": report.class_confirmed,
        "samples": report.samples,
        "note": report.note,
        "counterexample": None
        if report.counterexample is None
        else {
            "x1": list(report.counterexample[0]),
            "u1": _label(report.counterexample[1]),
            "d1": list(report.counterexample[2]),
            "x2": list(report.counterexample[3]),
            "u2": _label(report.counterexample[4]),
            "d2": list(report.counterexample[5]),
            "f1": list(report.counterexample[6]),
            "f2": list(report.counterexample[7]),
        },
    }
    _emit(_report("validate", model, seed, started, payload))
    return 0 if report.class_confirmed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moninv",
        description="Robust controlled invariants for monotone discrete-time systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_default=0):
        p.add_argument("config", help="plant configuration file")
        p.add_argument("--out", help="directory for CSV/figure outputs")
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("verify", help="check a candidate invariant set")
    common(p)
    p.add_argument("invariant", help="antichain CSV of the candidate's maximal points")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("synth", help="compute an invariant set")
    common(p)
    p.add_argument("--epsilon", type=float, default=None, help="termination precision")
    p.add_argument("--nmax", type=int, default=None, help="search horizon bound")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="closed-loop simulation inside an invariant")
    common(p, seed_default=None)
    p.add_argument("invariant", help="antichain CSV of the invariant's maximal points")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--runs", type=int, default=10)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="sampled monotonicity-class check")
    common(p, seed_default=None)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PreconditionError, UsageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
