"""Robust controlled invariants for monotone discrete-time systems."""

__version__ = "0.1.0"

from .order import (
    Antichain,
    Box,
    DimensionMismatch,
    Front,
    LowerSet,
    OrderedSpace,
    Point,
    SpaceMismatch,
    UpperSet,
    UsageError,
    gap,
    incomparable,
    insert_extremal,
    leq,
    lower_contains,
    lt,
    union_lower,
    upper_contains,
)
from .dynamics import (
    BUILTINS,
    EvaluationError,
    MonotoneSystem,
    MonotonicityReport,
    builtin_acc,
    builtin_switched2d,
    make_acc,
    make_switched_affine,
    step,
    validate_monotonicity,
)
from .config import ConfigError, LoadedModel, load_config, parse_system
from .reach import (
    ClosedLoopError,
    ReachLayer,
    layer_within,
    propagate,
    reach_tube,
    simulate_closed_loop,
)
from .feasibility import (
    CertificateError,
    Feasible,
    FeasibilityCertificate,
    Undecided,
    Unsafe,
    UnsafeCertificate,
    Verdict,
    check_certificate,
    extract_slacks,
    feasibility_radius,
    leads_to_unsafe,
    open_loop_feasible,
)
from .invariance import (
    Controller,
    ControllerDomainError,
    InvariantResult,
    PreconditionError,
    VerifyReport,
    check_containment_lemma,
    extract_controller,
    synthesize,
    verify_invariant,
)
from .oracle import ComparisonReport, GridRun, compare, grid_fixed_point, run_grid_fixed_point
