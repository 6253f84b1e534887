"""Bounded asynchronous execution: configurations, steps, reachability.

Roles run concurrently and exchange messages over one FIFO queue per ordered
role pair.  A send appends to the queue towards the peer and is enabled only
while that queue holds fewer than `k` messages; a receive pops the head of
the queue from the peer when label and sort match.  `build_bounded_graph`
explores every interleaving under such a bound `k` breadth-first.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .model import Action, Direction, System

Message = tuple[str, str]  # (label, sort)


@dataclass(frozen=True)
class Configuration:
    """A global snapshot: one machine state per role plus all queue contents.

    Both tuples follow the system's canonical order (`System.roles`,
    `System.channels`), so structural equality is configuration equality.
    """

    locals: tuple[int, ...]
    buffers: tuple[tuple[Message, ...], ...]


@dataclass(frozen=True)
class Step:
    """One transition taken by one role."""

    role: str
    action: Action

    def __str__(self) -> str:
        return f"{self.role} {self.action}"


class ResourceExhausted(RuntimeError):
    """Exploration hit the configuration cap before exhausting the graph."""

    def __init__(self, configs_seen: int):
        super().__init__(f"exploration stopped after {configs_seen} configurations")
        self.configs_seen = configs_seen


def initial_configuration(system: System) -> Configuration:
    return Configuration(
        tuple(system.machines[r].initial for r in system.roles),
        tuple(() for _ in system.channels),
    )


def _fire(system: System, cfg: Configuration, role_idx: int, dst: int,
          channel: int, push: Message | None) -> Configuration:
    locals_ = list(cfg.locals)
    locals_[role_idx] = dst
    buffers = list(cfg.buffers)
    if push is not None:
        buffers[channel] = buffers[channel] + (push,)
    else:
        buffers[channel] = buffers[channel][1:]
    return Configuration(tuple(locals_), tuple(buffers))


def enabled_steps(
    system: System, cfg: Configuration, bound: int | None,
) -> list[tuple[Step, Configuration]]:
    """All steps enabled in `cfg`, with their successor configurations.

    Deterministically ordered: roles in system order, then each role's
    transitions in declaration order.  `bound` of None means queues are
    unbounded (sends are always enabled).
    """
    out: list[tuple[Step, Configuration]] = []
    for ri, role in enumerate(system.roles):
        for action, dst in system.machines[role].outgoing(cfg.locals[ri]):
            if action.direction is Direction.SEND:
                ci = system.channel_index[(role, action.peer)]
                if bound is None or len(cfg.buffers[ci]) < bound:
                    nxt = _fire(system, cfg, ri, dst, ci, (action.label, action.sort))
                    out.append((Step(role, action), nxt))
            else:
                ci = system.channel_index[(action.peer, role)]
                buf = cfg.buffers[ci]
                if buf and buf[0] == (action.label, action.sort):
                    nxt = _fire(system, cfg, ri, dst, ci, None)
                    out.append((Step(role, action), nxt))
    return out


def apply_step(
    system: System, cfg: Configuration, step: Step, bound: int | None,
) -> Configuration | None:
    """Successor of `cfg` after `step`, or None when the step is not enabled."""
    ri = system.role_index.get(step.role)
    if ri is None:
        return None
    for action, dst in system.machines[step.role].outgoing(cfg.locals[ri]):
        if action != step.action:
            continue
        if action.direction is Direction.SEND:
            ci = system.channel_index[(step.role, action.peer)]
            if bound is not None and len(cfg.buffers[ci]) >= bound:
                return None
            return _fire(system, cfg, ri, dst, ci, (action.label, action.sort))
        ci = system.channel_index[(action.peer, step.role)]
        buf = cfg.buffers[ci]
        if not buf or buf[0] != (action.label, action.sort):
            return None
        return _fire(system, cfg, ri, dst, ci, None)
    return None


@dataclass
class BoundedGraph:
    """Deduplicated reachability graph under a queue bound `k`.

    Nodes are numbered 0.. in breadth-first discovery order (0 is the initial
    configuration), which makes numbering and edge order deterministic.
    `parent` records the discovery edge of each node, so following it back
    from any node replays one shortest derivation; `depth` is its length.
    """

    system: System
    k: int
    nodes: list[Configuration]
    edges: list[tuple[int, Step, int]]
    initial: int
    parent: list[tuple[int, Step] | None]
    depth: list[int]
    index: dict[Configuration, int]
    out: list[list[tuple[Step, int]]]


def build_bounded_graph(
    system: System, k: int, max_configs: int = 1_000_000,
) -> BoundedGraph:
    """Breadth-first exploration of every configuration reachable under `k`.

    Raises `ResourceExhausted` once more than `max_configs` distinct
    configurations would have to be kept.
    """
    if k < 1:
        raise ValueError("bound must be at least 1")
    init = initial_configuration(system)
    nodes = [init]
    index = {init: 0}
    parent: list[tuple[int, Step] | None] = [None]
    depth = [0]
    edges: list[tuple[int, Step, int]] = []
    out: list[list[tuple[Step, int]]] = [[]]
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for step, cfg in enabled_steps(system, nodes[u], k):
            v = index.get(cfg)
            if v is None:
                if len(nodes) >= max_configs:
                    raise ResourceExhausted(len(nodes))
                v = len(nodes)
                index[cfg] = v
                nodes.append(cfg)
                parent.append((u, step))
                depth.append(depth[u] + 1)
                out.append([])
                queue.append(v)
            edges.append((u, step, v))
            out[u].append((step, v))
    return BoundedGraph(system, k, nodes, edges, 0, parent, depth, index, out)
