"""Bounded compatibility checking.

A system is accepted at bound `k` when two facts hold over the k-bounded
reachability graph:

* send coverage -- wherever a role has a pending send, the *other* roles can
  always act (possibly not at all) until the target queue has room, so no
  send is starved by the bound itself;
* safety -- no role sits in a receive state forever (progress), and every
  queued message can still be consumed on some continuation (eventual
  reception).

The least such `k` is found by simply trying k = 1, 2, ... and stopping at
the first bound with full send coverage; its safety check then settles the
verdict.  All closures below run backwards over the edge list with explicit
worklists, so each check is linear in the graph.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

from .model import Action, Direction, System
from .semantics import BoundedGraph, Step, build_bounded_graph

DEFAULT_MAX_BOUND = 10
DEFAULT_MAX_CONFIGS = 1_000_000


@dataclass(frozen=True)
class ProgressViolation:
    """`role` can end up parked in receive state `state` with no way on."""

    role: str
    state: int


@dataclass(frozen=True)
class EventualReceptionViolation:
    """A `label`/`sort` message from `sender` can rot unread in `receiver`'s queue."""

    sender: str
    receiver: str
    label: str
    sort: str


@dataclass(frozen=True)
class Violation:
    kind: ProgressViolation | EventualReceptionViolation
    witness: int
    trace: tuple[Step, ...]


@dataclass(frozen=True)
class CheckStats:
    configurations: int
    edges: int
    bounds_tried: tuple[int, ...]
    elapsed_ms: int


@dataclass(frozen=True)
class Safe:
    k: int
    stats: CheckStats


@dataclass(frozen=True)
class Unsafe:
    k: int
    violations: tuple[Violation, ...]


@dataclass(frozen=True)
class Inconclusive:
    max_bound: int
    note: str
    # safety findings from bounds without full send coverage; suggestive only
    bounded: tuple[tuple[int, Violation], ...] = ()


Verdict = Safe | Unsafe | Inconclusive


@dataclass(frozen=True)
class CheckOutcome:
    verdict: Verdict
    stats: CheckStats


def extract_trace(graph: BoundedGraph, node: int) -> tuple[Step, ...]:
    """One shortest derivation of `node` from the initial configuration."""
    steps: list[Step] = []
    while True:
        link = graph.parent[node]
        if link is None:
            break
        node, step = link[0], link[1]
        steps.append(step)
    steps.reverse()
    return tuple(steps)


def _backward_closure(n: int, seeds: list[bool], rev: list[list[int]]) -> list[bool]:
    reach = list(seeds)
    work = [v for v in range(n) if reach[v]]
    while work:
        v = work.pop()
        for u in rev[v]:
            if not reach[u]:
                reach[u] = True
                work.append(u)
    return reach


def check_exhaustive(
    system: System, graph: BoundedGraph,
) -> tuple[tuple[int, str, Action], ...]:
    """Send obligations the bound starves, as (node, role, action) triples.

    An obligation is met when the other roles can step (zero or more times)
    from the node to somewhere the send's target queue has room.  An empty
    result means the graph accounts for every send at this bound.
    """
    n = len(graph.nodes)
    obligations: list[tuple[int, str, Action]] = []
    for ri, role in enumerate(system.roles):
        machine = system.machines[role]
        peers = sorted({a.peer for _, a, _ in machine.transitions
                       if a.direction is Direction.SEND})
        if not peers:
            continue
        rev: list[list[int]] = [[] for _ in range(n)]
        for u, step, v in graph.edges:
            if step.role != role:
                rev[v].append(u)
        for peer in peers:
            ci = system.channel_index[(role, peer)]
            room = [len(node.buffers[ci]) < graph.k for node in graph.nodes]
            reachable = _backward_closure(n, room, rev)
            for i, node in enumerate(graph.nodes):
                if reachable[i]:
                    continue
                for action, _ in machine.outgoing(node.locals[ri]):
                    if action.direction is Direction.SEND and action.peer == peer:
                        obligations.append((i, role, action))
    return tuple(obligations)


def check_safety(system: System, graph: BoundedGraph) -> tuple[Violation, ...]:
    """Progress and eventual-reception violations over the bounded graph.

    Witnesses are minimised: one violation per (kind, role or channel, local
    state) at the smallest BFS depth, each carrying a replayable shortest
    trace.  An empty result means the system is safe at this bound.
    """
    n = len(graph.nodes)
    rev: list[list[int]] = [[] for _ in range(n)]
    for u, _, v in graph.edges:
        rev[v].append(u)

    best: dict[tuple, tuple[int, int, object]] = {}

    def consider(key: tuple, node: int, kind) -> None:
        rank = (graph.depth[node], node)
        if key not in best or rank < best[key][:2]:
            best[key] = (rank[0], rank[1], kind)

    for ri, role in enumerate(system.roles):
        machine = system.machines[role]
        seeds = [False] * n
        for u, step, _ in graph.edges:
            if step.role == role:
                seeds[u] = True
        movable = _backward_closure(n, seeds, rev)
        for i, node in enumerate(graph.nodes):
            state = node.locals[ri]
            if machine.direction_of(state) is Direction.RECEIVE and not movable[i]:
                consider(("progress", role, state), i, ProgressViolation(role, state))

    for ci, (sender, receiver) in enumerate(system.channels):
        seeds = [False] * n
        for u, step, _ in graph.edges:
            if (step.role == receiver and step.action.direction is Direction.RECEIVE
                    and step.action.peer == sender):
                seeds[u] = True
        consumable = _backward_closure(n, seeds, rev)
        qi = system.role_index[receiver]
        for i, node in enumerate(graph.nodes):
            if node.buffers[ci] and not consumable[i]:
                label, sort = node.buffers[ci][0]
                consider(
                    ("reception", sender, receiver, node.locals[qi]),
                    i,
                    EventualReceptionViolation(sender, receiver, label, sort))

    violations = [
        Violation(kind, node, extract_trace(graph, node))
        for _, node, kind in best.values()]
    violations.sort(key=lambda v: (
        len(v.trace), v.witness, v.kind.__class__.__name__,
        tuple(str(x) for x in vars(v.kind).values())))
    return tuple(violations)


def local_fingerprint(graph: BoundedGraph, role: str) -> frozenset:
    """What `role` can do anywhere in the graph: its visited states, each
    paired with the set of actions it actually fires from that state.

    Stable fingerprints between bound k and k+1 are the telltale that the
    bound saturated the role's behaviour.
    """
    ri = graph.system.role_index[role]
    states = {node.locals[ri] for node in graph.nodes}
    fired: dict[int, set[Action]] = {s: set() for s in states}
    for u, step, _ in graph.edges:
        if step.role == role:
            fired[graph.nodes[u].locals[ri]].add(step.action)
    return frozenset((s, frozenset(actions)) for s, actions in fired.items())


def check_kmc_detailed(
    system: System,
    max_bound: int = DEFAULT_MAX_BOUND,
    max_configs: int = DEFAULT_MAX_CONFIGS,
    collect_bounded: bool = False,
) -> CheckOutcome:
    """Search k = 1..max_bound for the least bound with full send coverage
    and settle the verdict there.

    Returns the verdict together with exploration statistics for the bound
    that settled it (or the last bound tried, when inconclusive).  With
    `collect_bounded`, safety findings from non-covering bounds are attached
    to an inconclusive verdict as unverified hints.
    """
    if max_bound < 1:
        raise ValueError("max_bound must be at least 1")
    started = time.perf_counter()
    bounds: list[int] = []
    last = None
    hints: list[tuple[int, Violation]] = []
    hinted: set = set()
    for k in range(1, max_bound + 1):
        graph = build_bounded_graph(system, k, max_configs)
        bounds.append(k)
        obligations = check_exhaustive(system, graph)
        if obligations:
            if collect_bounded:
                for v in check_safety(system, graph):
                    if v.kind not in hinted:
                        hinted.add(v.kind)
                        hints.append((k, v))
            last = (graph, obligations)
            continue
        violations = check_safety(system, graph)
        stats = CheckStats(
            len(graph.nodes), len(graph.edges), tuple(bounds), _ms(started))
        if violations:
            return CheckOutcome(Unsafe(k, violations), stats)
        return CheckOutcome(Safe(k, stats), stats)

    graph, obligations = last
    stats = CheckStats(len(graph.nodes), len(graph.edges), tuple(bounds), _ms(started))
    node, role, action = obligations[0]
    note = (
        f"no bound up to {max_bound} accounts for every send: at k={max_bound}, "
        f"{len(obligations)} pending send(s) stay blocked "
        f"(first: {role} cannot fire {action} at node {node})")
    return CheckOutcome(Inconclusive(max_bound, note, tuple(hints)), stats)


def _ms(started: float) -> int:
    return int((time.perf_counter() - started) * 1000)


def check_kmc(
    system: System,
    max_bound: int = DEFAULT_MAX_BOUND,
    max_configs: int = DEFAULT_MAX_CONFIGS,
) -> Verdict:
    """Least-bound compatibility verdict; see `check_kmc_detailed`."""
    return check_kmc_detailed(system, max_bound, max_configs).verdict
