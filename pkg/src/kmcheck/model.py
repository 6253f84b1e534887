"""Protocol model: roles, actions, local types, and their machines.

A protocol is described per role by a local type (send/receive
actions, directed choice, guarded recursion).  Each local type compiles to a
finite state machine; a `System` bundles one machine per role and fixes the
role order used everywhere else (channel order, configuration layout,
scheduling).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from .dsl import SourceSpan

ROLE_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

DEFAULT_SORT = "unit"


class Direction(Enum):
    SEND = "!"
    RECEIVE = "?"


@dataclass(frozen=True)
class Action:
    """One communication: `peer!label<sort>` (send) or `peer?label<sort>`."""

    peer: str
    direction: Direction
    label: str
    sort: str = DEFAULT_SORT

    def __str__(self) -> str:
        return f"{self.peer}{self.direction.value}{self.label}<{self.sort}>"

    @property
    def key(self) -> tuple[str, Direction, str]:
        """Determinism key: two transitions from one state must differ here."""
        return (self.peer, self.direction, self.label)


def send(peer: str, label: str, sort: str = DEFAULT_SORT) -> Action:
    return Action(peer, Direction.SEND, label, sort)


def receive(peer: str, label: str, sort: str = DEFAULT_SORT) -> Action:
    return Action(peer, Direction.RECEIVE, label, sort)


# --- local types ------------------------------------------------------------
#
# Source spans are carried for error reporting only; they never take part in
# equality or hashing, so structurally identical sub-terms from different
# places in a file compare equal.


@dataclass(frozen=True)
class End:
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RecVar:
    var: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Branch:
    action: Action
    tail: "LocalType"
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Choice:
    branches: tuple[Branch, ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RecBinder:
    var: str
    body: "LocalType"
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


LocalType = End | RecVar | Choice | RecBinder


def prefix(action: Action, tail: LocalType) -> Choice:
    """Single-action continuation, the common degenerate choice."""
    return Choice((Branch(action, tail),))


class LocalTypeError(ValueError):
    """A structurally ill-formed local type."""

    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span


class UnguardedRecursion(LocalTypeError):
    pass


class UnboundVariable(LocalTypeError):
    pass


class MixedChoice(LocalTypeError):
    pass


class DuplicateBranch(LocalTypeError):
    pass


@dataclass(frozen=True)
class TypeIssue:
    """One fault found while checking a local type, in source walk order."""

    kind: type[LocalTypeError]
    message: str
    span: SourceSpan | None


def check_local_type(
    lt: LocalType,
    subject: str | None = None,
    roles: Iterable[str] | None = None,
) -> list[TypeIssue]:
    """Collect structural faults in `lt`, in deterministic source order.

    Checks: recursion variables are bound and guarded (at least one action
    between binder and use), choices do not mix sends with receives, branch
    labels are distinct per choice.  When `subject`/`roles` are given, also
    flags self-communication and unknown peers.
    """
    known = set(roles) if roles is not None else None
    issues: list[TypeIssue] = []

    def walk(t: LocalType, guarded: dict[str, bool]) -> None:
        if isinstance(t, End):
            return
        if isinstance(t, RecVar):
            if t.var not in guarded:
                issues.append(TypeIssue(
                    UnboundVariable, f"recursion variable '{t.var}' is not bound", t.span))
            elif not guarded[t.var]:
                issues.append(TypeIssue(
                    UnguardedRecursion,
                    f"recursion variable '{t.var}' is used without an action in between",
                    t.span))
            return
        if isinstance(t, RecBinder):
            walk(t.body, {**guarded, t.var: False})
            return
        seen: dict[tuple[str, Direction, str], Branch] = {}
        direction = t.branches[0].action.direction if t.branches else None
        for b in t.branches:
            a = b.action
            if a.direction is not direction:
                issues.append(TypeIssue(
                    MixedChoice, "choice mixes send and receive branches", b.span))
            if a.key in seen:
                issues.append(TypeIssue(
                    DuplicateBranch,
                    f"duplicate branch '{a.peer}{a.direction.value}{a.label}' in choice",
                    b.span))
            seen[a.key] = b
            if subject is not None and a.peer == subject:
                issues.append(TypeIssue(
                    LocalTypeError, f"role '{subject}' communicates with itself", b.span))
            if known is not None and a.peer not in known:
                issues.append(TypeIssue(
                    LocalTypeError, f"unknown peer role '{a.peer}'", b.span))
            # crossing an action guards every recursion variable in scope
            walk(b.tail, {v: True for v in guarded})
        return

    walk(lt, {})
    return issues


# --- machines ---------------------------------------------------------------


@dataclass(frozen=True)
class Machine:
    """A finite state machine for one role.

    States are dense integers with `initial` = 0 by construction; transitions
    keep their declaration order, which downstream code relies on for
    deterministic scheduling and rendering.
    """

    states: frozenset[int]
    initial: int
    transitions: tuple[tuple[int, Action, int], ...]

    @cached_property
    def _outgoing(self) -> dict[int, tuple[tuple[Action, int], ...]]:
        out: dict[int, list[tuple[Action, int]]] = {}
        for src, action, dst in self.transitions:
            out.setdefault(src, []).append((action, dst))
        return {s: tuple(v) for s, v in out.items()}

    def outgoing(self, state: int) -> tuple[tuple[Action, int], ...]:
        return self._outgoing.get(state, ())

    def is_terminal(self, state: int) -> bool:
        return not self._outgoing.get(state)

    def direction_of(self, state: int) -> Direction | None:
        """Direction of the state's actions; None for a terminal state."""
        out = self._outgoing.get(state)
        return out[0][0].direction if out else None


def _close(t: LocalType, env: dict[str, LocalType | None]) -> LocalType:
    # Substitute every free recursion variable by its (already closed) binder
    # term.  Variables bound inside `t` map to None and stay put.
    if isinstance(t, End):
        return t
    if isinstance(t, RecVar):
        repl = env[t.var]
        return t if repl is None else repl
    if isinstance(t, RecBinder):
        return RecBinder(t.var, _close(t.body, {**env, t.var: None}), t.span)
    return Choice(
        tuple(Branch(b.action, _close(b.tail, env), b.span) for b in t.branches),
        t.span)


def _subst(t: LocalType, var: str, repl: LocalType) -> LocalType:
    if isinstance(t, RecVar):
        return repl if t.var == var else t
    if isinstance(t, RecBinder):
        if t.var == var:  # shadowed
            return t
        return RecBinder(t.var, _subst(t.body, var, repl), t.span)
    if isinstance(t, Choice):
        return Choice(
            tuple(Branch(b.action, _subst(b.tail, var, repl), b.span) for b in t.branches),
            t.span)
    return t


def _behaviour(t: LocalType) -> LocalType:
    # Unfold leading binders (`rec t. T` behaves as `T[t := rec t. T]`) until
    # an action choice or `end` surfaces.  Guarded recursion makes this
    # terminate; `t` must be closed, so no bare variable can surface.
    while isinstance(t, RecBinder):
        t = _subst(t.body, t.var, t)
    assert not isinstance(t, RecVar)
    return t


def local_type_to_machine(lt: LocalType, subject: str) -> Machine:
    """Compile a local type to its machine.

    States are the distinct behaviours among sub-terms of `lt`: a binder is
    identified with its body, a recursion variable with its binder, and
    structurally identical sub-terms share one state.  Ids are assigned in
    depth-first order of first reachability, so the initial state is 0 and
    numbering is canonical.

    Raises UnguardedRecursion, UnboundVariable, MixedChoice or
    DuplicateBranch on an ill-formed input.
    """
    issues = check_local_type(lt, subject=None, roles=None)
    if issues:
        first = issues[0]
        raise first.kind(first.message, first.span)

    root = _behaviour(_close(lt, {}))
    ids: dict[LocalType, int] = {}
    succ: list[list[tuple[Action, LocalType]]] = []
    stack = [root]
    while stack:
        t = stack.pop()
        if t in ids:
            continue
        ids[t] = len(succ)
        if isinstance(t, Choice):
            row = [(b.action, _behaviour(b.tail)) for b in t.branches]
        else:
            row = []
        succ.append(row)
        for _, nxt in reversed(row):
            if nxt not in ids:
                stack.append(nxt)

    transitions = tuple(
        (src, action, ids[nxt])
        for src, row in enumerate(succ)
        for action, nxt in row)
    return Machine(frozenset(range(len(succ))), 0, transitions)


def find_isomorphism(a: Machine, b: Machine) -> dict[int, int] | None:
    """State bijection making `b` identical to `a`, or None.

    Both machines must be deterministic with all states reachable, which
    makes the candidate mapping unique: pair the initials, then follow
    matching actions.
    """
    if len(a.states) != len(b.states) or len(a.transitions) != len(b.transitions):
        return None
    mapping = {a.initial: b.initial}
    queue = [a.initial]
    while queue:
        s = queue.pop()
        t = mapping[s]
        out_a = {act: dst for act, dst in a.outgoing(s)}
        out_b = {act: dst for act, dst in b.outgoing(t)}
        if set(out_a) != set(out_b):
            return None
        for act, dst in out_a.items():
            image = out_b[act]
            if dst in mapping:
                if mapping[dst] != image:
                    return None
            else:
                mapping[dst] = image
                queue.append(dst)
    if len(mapping) != len(a.states):
        return None
    return mapping


# --- systems ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class System:
    """One machine per role; `roles` fixes the canonical order."""

    roles: tuple[str, ...]
    machines: dict[str, Machine]

    @cached_property
    def role_index(self) -> dict[str, int]:
        return {r: i for i, r in enumerate(self.roles)}

    @cached_property
    def channels(self) -> tuple[tuple[str, str], ...]:
        """Ordered role pairs (sender, receiver), in role order."""
        return tuple((p, q) for p in self.roles for q in self.roles if p != q)

    @cached_property
    def channel_index(self) -> dict[tuple[str, str], int]:
        return {c: i for i, c in enumerate(self.channels)}

    def machine_of(self, role: str) -> Machine:
        return self.machines[role]


class Severity(Enum):
    ERROR = "error"
    LINT = "lint"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    role: str | None = None
    state: int | None = None

    def __str__(self) -> str:
        where = f" [{self.role}" + (f"/{self.state}" if self.state is not None else "") + "]" \
            if self.role else ""
        return f"{self.severity.value}: {self.message}{where}"


def _error(code: str, message: str, role: str | None = None, state: int | None = None):
    return Diagnostic(Severity.ERROR, code, message, role, state)


def _lint(code: str, message: str, role: str | None = None, state: int | None = None):
    return Diagnostic(Severity.LINT, code, message, role, state)


def validate_system(system: System) -> list[Diagnostic]:
    """Well-formedness report for a system; empty means fully valid.

    Errors cover role naming and uniqueness, machine/role agreement, state
    references, determinism, mixed send/receive states, self-communication,
    unknown peers and unreachable states.  A choice whose branches target
    different peers is reported as a lint, not an error.
    """
    diags: list[Diagnostic] = []
    if not system.roles:
        diags.append(_error("no-roles", "system has no roles"))
    seen_roles = set()
    for r in system.roles:
        if not ROLE_NAME.match(r):
            diags.append(_error("bad-role-name", f"invalid role name '{r}'", r))
        if r in seen_roles:
            diags.append(_error("duplicate-role", f"duplicate role '{r}'", r))
        seen_roles.add(r)
        if r not in system.machines:
            diags.append(_error("missing-machine", f"role '{r}' has no machine", r))
    for r in system.machines:
        if r not in seen_roles:
            diags.append(_error("unknown-machine", f"machine for undeclared role '{r}'", r))

    for r in system.roles:
        m = system.machines.get(r)
        if m is None:
            continue
        if m.initial not in m.states:
            diags.append(_error("bad-initial", f"initial state {m.initial} does not exist", r))
            continue
        broken = False
        for src, action, dst in m.transitions:
            if src not in m.states or dst not in m.states:
                diags.append(_error(
                    "dangling-transition",
                    f"transition {src} --{action}--> {dst} leaves the state set", r, src))
                broken = True
        if broken:
            continue
        for s in sorted(m.states):
            out = m.outgoing(s)
            keys = [a.key for a, _ in out]
            if len(set(keys)) != len(keys):
                diags.append(_error(
                    "nondeterminism", f"state {s} has transitions sharing an action key", r, s))
            if len({a.direction for a, _ in out}) > 1:
                diags.append(_error(
                    "mixed-state", f"state {s} mixes send and receive transitions", r, s))
            for a, _ in out:
                if a.peer == r:
                    diags.append(_error(
                        "self-communication", f"state {s} communicates with '{r}' itself", r, s))
                elif a.peer not in seen_roles:
                    diags.append(_error(
                        "unknown-peer", f"state {s} addresses unknown role '{a.peer}'", r, s))
            if len({a.peer for a, _ in out}) > 1:
                diags.append(_lint(
                    "non-directed-choice",
                    f"state {s} chooses between different peers", r, s))
        reached = {m.initial}
        frontier = [m.initial]
        while frontier:
            s = frontier.pop()
            for _, dst in m.outgoing(s):
                if dst not in reached:
                    reached.add(dst)
                    frontier.append(dst)
        for s in sorted(m.states - reached):
            diags.append(_error("unreachable-state", f"state {s} is unreachable", r, s))
    return diags


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)
