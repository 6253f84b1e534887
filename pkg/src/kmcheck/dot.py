"""Graphviz DOT rendering of a system's machines."""
from __future__ import annotations

from .model import Machine, System


def machine_to_dot(role: str, machine: Machine) -> str:
    """One `digraph` for one role's machine.

    Output is byte-stable: states in numeric order, edges in declaration
    order.  The initial state is pointed at from a point-shaped pseudo-node
    and terminal states are drawn with a double border.
    """
    lines = [
        f"digraph {role} {{",
        "  rankdir=LR;",
        "  __start [shape=point];",
        f"  __start -> s{machine.initial};",
    ]
    for state in sorted(machine.states):
        shape = "doublecircle" if machine.is_terminal(state) else "circle"
        lines.append(f'  s{state} [shape={shape}, label="{state}"];')
    for src, action, dst in machine.transitions:
        lines.append(f'  s{src} -> s{dst} [label="{action}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(system: System) -> str:
    """All machines as DOT, one digraph per role, in role order."""
    return "\n".join(machine_to_dot(r, system.machines[r]) for r in system.roles)
