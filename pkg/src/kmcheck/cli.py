"""Command line front end: check, simulate, export-dot."""
from __future__ import annotations

import argparse
import json
import os
import pathlib
import sys

from .checker import (
    DEFAULT_MAX_BOUND,
    DEFAULT_MAX_CONFIGS,
    CheckStats,
    EventualReceptionViolation,
    Inconclusive,
    ProgressViolation,
    Safe,
    Unsafe,
    Violation,
    check_kmc_detailed,
)
from .dot import machine_to_dot
from .dsl import DslError, parse_system
from .semantics import ResourceExhausted
from .simulator import Outcome, format_trace, simulate

EX_OK = 0
EX_USAGE = 64
EX_DATAERR = 65
EX_RESOURCE = 70
EX_IOERR = 74


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the contract here is 64
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="kmcheck", description="Bounded compatibility checking "
                     "for asynchronous message-passing protocols.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="find the least safe bound or a counterexample")
    check.add_argument("file", help="protocol description to check")
    check.add_argument("--max-bound", type=int, default=DEFAULT_MAX_BOUND, metavar="N",
                       help="largest queue bound to try (default %(default)s)")
    check.add_argument("--max-configs", type=int, default=None, metavar="M",
                       help="cap on explored configurations per bound "
                            "(default %(default)s or $KMC_MAX_CONFIGS)")
    check.add_argument("--json", action="store_true", help="machine-readable report")
    check.add_argument("--report-bounded-violations", action="store_true",
                       help="on an inconclusive verdict, also show unverified "
                            "safety findings from bounds that starved some send")

    sim = sub.add_parser("simulate", help="run one random interleaving")
    sim.add_argument("file", help="protocol description to run")
    sim.add_argument("--bound", type=int, default=None, metavar="K",
                     help="queue bound (default: unbounded)")
    sim.add_argument("--seed", type=int, default=0, metavar="S",
                     help="PRNG seed (default %(default)s)")
    sim.add_argument("--steps", type=int, default=10_000, metavar="N",
                     help="step budget (default %(default)s)")
    sim.add_argument("--trace", metavar="FILE", help="write the executed trace here")

    dot = sub.add_parser("export-dot", help="write one Graphviz file per role")
    dot.add_argument("file", help="protocol description to export")
    dot.add_argument("-o", "--out-dir", default=".", metavar="DIR",
                     help="output directory (default: current directory)")
    return parser


def _load(parser: _Parser, path: str):
    try:
        text = pathlib.Path(path).read_text()
    except OSError as exc:
        print(f"{parser.prog}: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
        raise SystemExit(EX_IOERR)
    try:
        return parse_system(text)
    except DslError as exc:
        for err in exc.errors:
            print(f"{path}:{err.span.line}:{err.span.column}: {err.message}",
                  file=sys.stderr)
        raise SystemExit(EX_DATAERR)


def _step_json(step) -> dict:
    return {
        "role": step.role,
        "peer": step.action.peer,
        "dir": step.action.direction.value,
        "label": step.action.label,
        "sort": step.action.sort,
    }


def _violation_json(v: Violation) -> dict:
    trace = [_step_json(s) for s in v.trace]
    if isinstance(v.kind, ProgressViolation):
        return {"kind": "progress", "role": v.kind.role, "channel": None,
                "label": None, "sort": None, "trace": trace}
    return {"kind": "eventual_reception", "role": None,
            "channel": {"from": v.kind.sender, "to": v.kind.receiver},
            "label": v.kind.label, "sort": v.kind.sort, "trace": trace}


def _check_json(verdict, stats: CheckStats, max_bound: int) -> dict:
    if isinstance(verdict, Safe):
        kind, k, violations = "safe", verdict.k, []
    elif isinstance(verdict, Unsafe):
        kind, k, violations = "unsafe", verdict.k, list(verdict.violations)
    else:
        kind, k, violations = "inconclusive", None, []
    return {
        "schema": 1,
        "verdict": kind,
        "k": k,
        "max_bound": max_bound,
        "violations": [_violation_json(v) for v in violations],
        "stats": {
            "configurations": stats.configurations,
            "edges": stats.edges,
            "bounds_tried": list(stats.bounds_tried),
            "elapsed_ms": stats.elapsed_ms,
        },
    }


def _describe(kind) -> str:
    if isinstance(kind, ProgressViolation):
        return f"progress: role {kind.role} can be stuck receiving at state {kind.state}"
    return (f"eventual reception: message {kind.label}<{kind.sort}> from "
            f"{kind.sender} can rot unread in {kind.receiver}'s queue")


def _print_violation(v: Violation, indent: str = "") -> None:
    print(f"{indent}{_describe(v.kind)}")
    print(f"{indent}  trace ({len(v.trace)} steps):")
    for i, step in enumerate(v.trace, start=1):
        print(f"{indent}    {i}. {step}")


def _run_check(args) -> int:
    parser_prog = "kmcheck check"
    max_configs = args.max_configs
    if max_configs is None:
        env = os.environ.get("KMC_MAX_CONFIGS")
        if env is None:
            max_configs = DEFAULT_MAX_CONFIGS
        else:
            try:
                max_configs = int(env)
            except ValueError:
                print(f"{parser_prog}: error: KMC_MAX_CONFIGS is not an integer: {env!r}",
                      file=sys.stderr)
                return EX_USAGE
    if args.max_bound < 1 or max_configs < 1:
        print(f"{parser_prog}: error: bounds and caps must be at least 1", file=sys.stderr)
        return EX_USAGE

    system = _load(build_parser(), args.file)
    try:
        outcome = check_kmc_detailed(
            system, args.max_bound, max_configs,
            collect_bounded=args.report_bounded_violations)
    except ResourceExhausted as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EX_RESOURCE
    verdict, stats = outcome.verdict, outcome.stats

    if args.json:
        print(json.dumps(_check_json(verdict, stats, args.max_bound), indent=2))
    elif isinstance(verdict, Safe):
        print(f"{args.file}: safe at k={verdict.k}")
        bounds = ",".join(str(b) for b in stats.bounds_tried)
        print(f"  bounds tried {bounds}; {stats.configurations} configurations, "
              f"{stats.edges} edges, {stats.elapsed_ms} ms")
    elif isinstance(verdict, Unsafe):
        n = len(verdict.violations)
        print(f"{args.file}: unsafe at k={verdict.k} "
              f"({n} violation{'s' if n != 1 else ''})")
        for v in verdict.violations:
            _print_violation(v)
    else:
        print(f"{args.file}: inconclusive up to k={verdict.max_bound}")
        print(f"  {verdict.note}")
        for k, v in verdict.bounded:
            print(f"  unverified finding at k={k}:")
            _print_violation(v, indent="  ")

    if isinstance(verdict, Safe):
        return 0
    return 1 if isinstance(verdict, Unsafe) else 2


def _run_simulate(args) -> int:
    if (args.bound is not None and args.bound < 1) or args.steps < 0:
        print("kmcheck simulate: error: bound must be at least 1 and steps at least 0",
              file=sys.stderr)
        return EX_USAGE
    system = _load(build_parser(), args.file)
    result = simulate(system, args.bound, args.seed, args.steps)
    if args.trace:
        try:
            pathlib.Path(args.trace).write_text(format_trace(result.trace))
        except OSError as exc:
            print(f"kmcheck simulate: cannot write {args.trace}: "
                  f"{exc.strerror or exc}", file=sys.stderr)
            return EX_IOERR
    print(f"{result.outcome.value} after {result.steps_taken} steps")
    if result.outcome is Outcome.DEADLOCKED:
        for ci, (p, q) in enumerate(system.channels):
            buf = result.final.buffers[ci]
            if buf:
                pending = ", ".join(f"{label}<{sort}>" for label, sort in buf)
                print(f"  pending {p}->{q}: {pending}")
    return {Outcome.TERMINATED: 0, Outcome.DEADLOCKED: 1,
            Outcome.BUDGET_EXHAUSTED: 2}[result.outcome]


def _run_export_dot(args) -> int:
    system = _load(build_parser(), args.file)
    out_dir = pathlib.Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for role in system.roles:
            target = out_dir / f"{role}.dot"
            target.write_text(machine_to_dot(role, system.machines[role]))
            print(str(target))
    except OSError as exc:
        print(f"kmcheck export-dot: cannot write to {out_dir}: "
              f"{exc.strerror or exc}", file=sys.stderr)
        return EX_IOERR
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return _run_check(args)
        if args.command == "simulate":
            return _run_simulate(args)
        return _run_export_dot(args)
    except SystemExit as exc:  # raised by _load with the right code
        return exc.code if isinstance(exc.code, int) else EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
