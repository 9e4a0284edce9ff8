"""Plant configuration files.

A config is a line-based document of ``[section]`` headers and ``key =
value`` entries (``#`` starts a comment). It either names a builtin plant
or declares dimensions, order signs, sets, and per-coordinate update
expressions. The full grammar lives in ``docs/config_format.md``. Errors
carry the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import expr
from .dynamics import BUILTINS, BuiltinModel, MonotoneSystem, input_vector
from .order import Box, LowerSet, OrderedSpace, Point


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = 0, source: str = "<config>"):
        super().__init__(f"{source}:{line}: {message}" if line else f"{source}: {message}")
        self.line = line
        self.source = source
        self.message = message


@dataclass
class LoadedModel:
    """A parsed config: the plant plus synthesis defaults."""

    system: MonotoneSystem
    constraint: LowerSet
    epsilon: float
    n_max: int
    seed: int
    seeds: Optional[tuple[Point, ...]]
    name: str
    text: str


_SECTIONS = ("system", "state", "inputs", "disturbances", "dynamics", "synthesis")


def _parse_sections(text: str, source: str):
    sections: dict[str, list[tuple[int, str, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in _SECTIONS:
                raise ConfigError(f"unknown section [{current}]", lineno, source)
            sections.setdefault(current, [])
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, source)
        if current is None:
            raise ConfigError("entry before any [section] header", lineno, source)
        key, value = line.split("=", 1)
        sections[current].append((lineno, key.strip().lower(), value.strip()))
    return sections


def _floats(value: str, lineno: int, source: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in value.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"malformed number in {value!r}", lineno, source)


def _points(value: str, lineno: int, source: str) -> tuple[Point, ...]:
    return tuple(_floats(part, lineno, source) for part in value.split(";") if part.strip())


def _signs(value: str, lineno: int, source: str) -> tuple[int, ...]:
    out = []
    for tok in value.replace(",", " ").split():
        if tok in ("+", "+1", "1"):
            out.append(1)
        elif tok in ("-", "-1"):
            out.append(-1)
        else:
            raise ConfigError(f"sign must be '+' or '-', got {tok!r}", lineno, source)
    return tuple(out)


def _ranges(value: str, lineno: int, source: str) -> tuple[tuple[float, float], ...]:
    out = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ConfigError(f"range must look like 'lo:hi', got {part!r}", lineno, source)
        lo, hi = part.split(":", 1)
        try:
            out.append((float(lo), float(hi)))
        except ValueError:
            raise ConfigError(f"malformed range {part!r}", lineno, source)
    return tuple(out)


def _single(entries, key, lineno_default=0):
    found = [(ln, v) for ln, k, v in entries if k == key]
    if not found:
        return None, lineno_default
    ln, v = found[-1]
    return v, ln


def _repeated(entries, key):
    return [(ln, v) for ln, k, v in entries if k == key]


def load_config(text: str, source: str = "<config>") -> LoadedModel:
    sections = _parse_sections(text, source)
    dyn = sections.get("dynamics", [])
    builtin, bline = _single(dyn, "builtin")

    synth = sections.get("synthesis", [])
    eps_s, eps_ln = _single(synth, "epsilon")
    nmax_s, nmax_ln = _single(synth, "nmax")
    seed_s, seed_ln = _single(synth, "seed")
    seeds_s, seeds_ln = _single(synth, "seeds")

    if builtin is not None:
        for forbidden in ("system", "state", "inputs", "disturbances"):
            if sections.get(forbidden):
                raise ConfigError(
                    f"[{forbidden}] cannot be combined with a builtin plant",
                    sections[forbidden][0][0],
                    source,
                )
        if builtin not in BUILTINS:
            raise ConfigError(f"unknown builtin {builtin!r}", bline, source)
        kwargs = {}
        tau_s, tau_ln = _single(dyn, "tau")
        if tau_s is not None:
            if builtin != "acc":
                raise ConfigError("tau only applies to the acc builtin", tau_ln, source)
            kwargs["tau"] = _floats(tau_s, tau_ln, source)[0]
        try:
            model: BuiltinModel = BUILTINS[builtin](**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc), tau_ln if tau_s else bline, source)
        name = builtin
        system, constraint = model.system, model.constraint
        epsilon, n_max, seeds = model.epsilon, model.n_max, model.seeds
    else:
        system, constraint = _build_expression_system(sections, source)
        name, _ = _single(sections.get("system", []), "name")
        name = name or "custom"
        epsilon, n_max, seeds = 1.0, 12, None

    if eps_s is not None:
        epsilon = _floats(eps_s, eps_ln, source)[0]
    if nmax_s is not None:
        try:
            n_max = int(nmax_s)
        except ValueError:
            raise ConfigError(f"nmax must be an integer, got {nmax_s!r}", nmax_ln, source)
    seed = 0
    if seed_s is not None:
        try:
            seed = int(seed_s)
        except ValueError:
            raise ConfigError(f"seed must be an integer, got {seed_s!r}", seed_ln, source)
    if seeds_s is not None:
        seeds = _points(seeds_s, seeds_ln, source)
        for p in seeds:
            if len(p) != system.space.dim:
                raise ConfigError("seed point dimension mismatch", seeds_ln, source)

    return LoadedModel(system, constraint, epsilon, n_max, seed, seeds, name, text)


def _build_expression_system(sections, source) -> tuple[MonotoneSystem, LowerSet]:
    sys_entries = sections.get("system")
    if not sys_entries:
        raise ConfigError("missing [system] section (or a builtin plant)", 0, source)

    dim_s, dim_ln = _single(sys_entries, "dim")
    if dim_s is None:
        raise ConfigError("missing 'dim' in [system]", sys_entries[0][0], source)
    try:
        dim = int(dim_s)
    except ValueError:
        raise ConfigError(f"dim must be an integer, got {dim_s!r}", dim_ln, source)
    if dim <= 0:
        raise ConfigError("dim must be positive", dim_ln, source)

    signs_s, signs_ln = _single(sys_entries, "signs")
    signs = _signs(signs_s, signs_ln, source) if signs_s else (1,) * dim
    if len(signs) != dim:
        raise ConfigError(f"expected {dim} signs, got {len(signs)}", signs_ln, source)

    class_s, class_ln = _single(sys_entries, "class")
    mono_class = (class_s or "SM").upper()
    if mono_class not in ("SM", "CSM", "DSM", "CDSM"):
        raise ConfigError(f"unknown class {class_s!r}", class_ln, source)

    lip_s, lip_ln = _single(sys_entries, "lipschitz")
    lipschitz = _floats(lip_s, lip_ln, source)[0] if lip_s else None

    state = sections.get("state", [])
    box_s, box_ln = _single(state, "box")
    if box_s is None:
        raise ConfigError("missing 'box' in [state]", state[0][0] if state else 0, source)
    ranges = _ranges(box_s, box_ln, source)
    if len(ranges) != dim:
        raise ConfigError(f"expected {dim} box ranges, got {len(ranges)}", box_ln, source)
    try:
        box = Box(tuple(r[0] for r in ranges), tuple(r[1] for r in ranges))
    except ValueError as exc:
        raise ConfigError(str(exc), box_ln, source)

    floor = None
    floor_s, floor_ln = _single(state, "floor")
    if floor_s is not None:
        parts = [tok for tok in floor_s.replace(",", " ").split()]
        if len(parts) != dim:
            raise ConfigError(f"expected {dim} floor entries", floor_ln, source)
        floor = tuple(None if tok == "-" else float(tok) for tok in parts)

    space = OrderedSpace(dim, signs, base_box=box, floor=floor)

    cons_s, cons_ln = _single(state, "constraint")
    if cons_s is None:
        raise ConfigError("missing 'constraint' in [state]", box_ln, source)
    cons_points = _points(cons_s, cons_ln, source)
    for p in cons_points:
        if len(p) != dim:
            raise ConfigError("constraint point dimension mismatch", cons_ln, source)
    constraint = LowerSet.from_points(space, cons_points)

    inp = sections.get("inputs", [])
    u_entries = _repeated(inp, "u")
    if not u_entries:
        raise ConfigError("missing input declarations 'u = ...'", 0, source)
    inputs = []
    m = None
    for ln, v in u_entries:
        vec = _floats(v, ln, source)
        if m is None:
            m = len(vec)
        elif len(vec) != m:
            raise ConfigError("inputs disagree on dimension", ln, source)
        inputs.append(vec[0] if m == 1 else vec)
    in_signs_s, in_signs_ln = _single(inp, "signs")
    input_signs = _signs(in_signs_s, in_signs_ln, source) if in_signs_s else None
    if input_signs is not None and len(input_signs) != m:
        raise ConfigError(f"expected {m} input signs", in_signs_ln, source)
    if mono_class in ("CSM", "CDSM") and input_signs is None:
        raise ConfigError(f"{mono_class} needs input signs", 0, source)

    dist = sections.get("disturbances", [])
    d_entries = _repeated(dist, "d")
    if not d_entries:
        raise ConfigError("missing disturbance declarations 'd = ...'", 0, source)
    dist_points = []
    p_dim = None
    for ln, v in d_entries:
        vec = _floats(v, ln, source)
        if p_dim is None:
            p_dim = len(vec)
        elif len(vec) != p_dim:
            raise ConfigError("disturbances disagree on dimension", ln, source)
        dist_points.append(vec)
    d_signs_s, d_signs_ln = _single(dist, "signs")
    dist_signs = _signs(d_signs_s, d_signs_ln, source) if d_signs_s else None
    if dist_signs is not None and len(dist_signs) != p_dim:
        raise ConfigError(f"expected {p_dim} disturbance signs", d_signs_ln, source)
    if mono_class in ("DSM", "CDSM") and dist_signs is None:
        raise ConfigError(f"{mono_class} needs disturbance signs", 0, source)
    dist_box = None
    dbox_s, dbox_ln = _single(dist, "box")
    if dbox_s is not None:
        dranges = _ranges(dbox_s, dbox_ln, source)
        if len(dranges) != p_dim:
            raise ConfigError(f"expected {p_dim} disturbance ranges", dbox_ln, source)
        dist_box = Box(tuple(r[0] for r in dranges), tuple(r[1] for r in dranges))

    dyn = sections.get("dynamics", [])
    exprs: list[Optional[expr.Node]] = [None] * dim
    for ln, k, v in dyn:
        if not (k.startswith("x") and k[1:].isdigit()):
            raise ConfigError(f"unknown dynamics key {k!r}", ln, source)
        idx = int(k[1:]) - 1
        if not 0 <= idx < dim:
            raise ConfigError(f"coordinate {k} outside 1..{dim}", ln, source)
        try:
            node = expr.parse(v, line=ln)
            expr.check_vars(node, {"x": dim, "u": m, "d": p_dim}, line=ln)
        except expr.ExprError as exc:
            raise ConfigError(exc.message, exc.line, source)
        exprs[idx] = node
    missing = [i + 1 for i, e in enumerate(exprs) if e is None]
    if missing:
        raise ConfigError(
            f"missing update expressions for x{', x'.join(map(str, missing))}", 0, source
        )

    def f(x, u, d):
        uvec = input_vector(u)
        return tuple(expr.evaluate(node, x, uvec, d) for node in exprs)

    system = MonotoneSystem(
        space=space,
        inputs=tuple(inputs),
        dist_points=tuple(dist_points),
        dynamics=f,
        mono_class=mono_class,
        input_signs=input_signs,
        dist_signs=dist_signs,
        dist_box=dist_box,
        lipschitz=lipschitz,
        name="custom",
    )
    return system, constraint


def parse_system(text: str, source: str = "<config>") -> MonotoneSystem:
    """Parse a config and return just the plant."""
    return load_config(text, source).system
