"""Random interleaving runs and trace replay.

The simulator picks uniformly among the enabled steps of the current
configuration until the system terminates (all roles in a terminal state,
all queues empty), deadlocks (nothing enabled), or the step budget runs
out.  Runs are reproducible: the same system, bound, seed and budget always
yield the same trace.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .model import Direction, System
from .semantics import Configuration, Step, enabled_steps, initial_configuration


class Outcome(Enum):
    TERMINATED = "terminated"
    DEADLOCKED = "deadlocked"
    BUDGET_EXHAUSTED = "budget exhausted"


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    final: Configuration
    trace: tuple[Step, ...]
    steps_taken: int


def is_terminated(system: System, cfg: Configuration) -> bool:
    """Everyone finished and nothing left in flight."""
    return all(
        system.machines[r].is_terminal(cfg.locals[i])
        for i, r in enumerate(system.roles)
    ) and all(not buf for buf in cfg.buffers)


def simulate(
    system: System,
    bound: int | None,
    seed: int = 0,
    max_steps: int = 10_000,
) -> RunResult:
    """One random run under queue bound `bound` (None = unbounded queues)."""
    rng = random.Random(seed)
    cfg = initial_configuration(system)
    trace: list[Step] = []
    while True:
        if is_terminated(system, cfg):
            return RunResult(Outcome.TERMINATED, cfg, tuple(trace), len(trace))
        options = enabled_steps(system, cfg, bound)
        if not options:
            return RunResult(Outcome.DEADLOCKED, cfg, tuple(trace), len(trace))
        if len(trace) >= max_steps:
            return RunResult(Outcome.BUDGET_EXHAUSTED, cfg, tuple(trace), len(trace))
        step, cfg = options[rng.randrange(len(options))]
        trace.append(step)


class ReplayError(ValueError):
    """A trace stopped making sense at `index` (0-based).

    `reason` is one of "unknown_role" (the stepping role or its peer is not
    part of the system), "bad_action" (the role's current state has no such
    transition), or "not_enabled" (the transition exists but its queue is
    full, empty, or holds a different message at the head).
    """

    def __init__(self, index: int, reason: str, message: str):
        super().__init__(f"step {index}: {message}")
        self.index = index
        self.reason = reason


def replay(
    system: System, trace: tuple[Step, ...] | list[Step], bound: int | None,
) -> Configuration:
    """Drive the system through `trace` and return the final configuration.

    Raises `ReplayError` at the first step that cannot be taken, so a trace
    accepted by replay is a genuine execution under the given bound.
    """
    cfg = initial_configuration(system)
    for i, step in enumerate(trace):
        action = step.action
        if step.role not in system.role_index or action.peer not in system.role_index:
            raise ReplayError(i, "unknown_role", f"unknown role in '{step}'")
        ri = system.role_index[step.role]
        state = cfg.locals[ri]
        match = None
        for a, dst in system.machines[step.role].outgoing(state):
            if a == action:
                match = (a, dst)
                break
        if match is None:
            raise ReplayError(
                i, "bad_action",
                f"{step.role} has no transition '{action}' at state {state}")
        a, dst = match
        if a.direction is Direction.SEND:
            ci = system.channel_index[(step.role, a.peer)]
            if bound is not None and len(cfg.buffers[ci]) >= bound:
                raise ReplayError(
                    i, "not_enabled",
                    f"queue {step.role}->{a.peer} is full, cannot send '{a.label}'")
            buffers = list(cfg.buffers)
            buffers[ci] = buffers[ci] + ((a.label, a.sort),)
        else:
            ci = system.channel_index[(a.peer, step.role)]
            buf = cfg.buffers[ci]
            if not buf or buf[0] != (a.label, a.sort):
                head = f"'{buf[0][0]}'" if buf else "nothing"
                raise ReplayError(
                    i, "not_enabled",
                    f"{step.role} expects '{a.label}' from {a.peer} but {head} is queued")
            buffers = list(cfg.buffers)
            buffers[ci] = buf[1:]
        locals_ = list(cfg.locals)
        locals_[ri] = dst
        cfg = Configuration(tuple(locals_), tuple(buffers))
    return cfg


def format_trace(trace: tuple[Step, ...] | list[Step]) -> str:
    """Tab-separated trace text: role, peer, direction, label, sort."""
    lines = [
        "\t".join((s.role, s.action.peer, s.action.direction.value,
                   s.action.label, s.action.sort))
        for s in trace]
    return "".join(line + "\n" for line in lines)


def parse_trace(text: str):
    """Inverse of `format_trace`; raises ValueError on a malformed line."""
    from .model import Action

    steps = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 5 or parts[2] not in ("!", "?"):
            raise ValueError(f"line {lineno}: not a trace step: {line!r}")
        role, peer, mark, label, sort = parts
        direction = Direction.SEND if mark == "!" else Direction.RECEIVE
        steps.append(Step(role, Action(peer, direction, label, sort)))
    return tuple(steps)
