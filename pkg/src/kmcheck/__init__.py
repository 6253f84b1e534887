"""Bounded compatibility checking for asynchronous message-passing protocols.

Describe each participant of a protocol by a local type, and this
package answers whether the whole ensemble can run over FIFO queues without
anyone deadlocking or any message going unread -- and if so, how much queue
capacity accounts for every behaviour.  See `check_kmc` for the entry point,
`parse_system` for the textual format, and `simulate`/`replay` for running
and validating executions.
"""
from .checker import (
    CheckOutcome,
    CheckStats,
    EventualReceptionViolation,
    Inconclusive,
    ProgressViolation,
    Safe,
    Unsafe,
    Verdict,
    Violation,
    check_exhaustive,
    check_kmc,
    check_kmc_detailed,
    check_safety,
    extract_trace,
    local_fingerprint,
)
from .dot import export_dot, machine_to_dot
from .dsl import (
    DslError,
    ParseError,
    SourceSpan,
    ValidationError,
    machine_to_local_type,
    parse_system,
    render_local_type,
    render_system,
)
from .model import (
    Action,
    Branch,
    Choice,
    Diagnostic,
    Direction,
    DuplicateBranch,
    End,
    LocalType,
    LocalTypeError,
    Machine,
    MixedChoice,
    RecBinder,
    RecVar,
    Severity,
    System,
    UnboundVariable,
    UnguardedRecursion,
    find_isomorphism,
    local_type_to_machine,
    receive,
    send,
    validate_system,
)
from .semantics import (
    BoundedGraph,
    Configuration,
    ResourceExhausted,
    Step,
    apply_step,
    build_bounded_graph,
    enabled_steps,
    initial_configuration,
)
from .simulator import (
    Outcome,
    ReplayError,
    RunResult,
    format_trace,
    is_terminated,
    parse_trace,
    replay,
    simulate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
