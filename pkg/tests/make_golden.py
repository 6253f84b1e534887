"""Regenerate tests/golden/oracle.json from the brute-force reference.

Run from the repository root:

    python tests/make_golden.py

The checker tests compare against the frozen file, never against a live
oracle run, so expected values only change when this script is re-run on
purpose.
"""
from __future__ import annotations

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from kmcheck.dsl import parse_system

import oracle

HERE = pathlib.Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden" / "oracle.json"

PIN_MAX_BOUND = 4

# (fixture, bounds) pairs whose reachable-graph sizes get pinned as well
GRAPH_PINS = {
    "handshake.kmc": (1,),
    "solo.kmc": (1,),
    "fib.kmc": (1, 2),
    "flood.kmc": (1, 2, 3),
    "prefetch.kmc": (2,),
}


def main() -> None:
    golden: dict = {
        "note": "frozen output of tests/make_golden.py; rerun that script to refresh",
        "max_bound": PIN_MAX_BOUND,
        "verdicts": {},
        "graphs": {},
        "depths": {},
    }
    for path in sorted(FIXTURES.glob("*.kmc")):
        system = parse_system(path.read_text())
        verdict = oracle.oracle_verdict(system, PIN_MAX_BOUND)
        verdict["progress"] = [list(t) for t in verdict["progress"]]
        verdict["er"] = [list(t) for t in verdict["er"]]
        golden["verdicts"][path.name] = verdict
        if path.name in GRAPH_PINS:
            golden["graphs"][path.name] = {
                str(k): list(oracle.graph_counts(system, k))
                for k in GRAPH_PINS[path.name]}

    bug = parse_system((FIXTURES / "fib_progress_bug.kmc").read_text())
    golden["depths"]["fib_progress_bug.kmc"] = {
        "stuck_m": oracle.min_stuck_depth(bug, 1, "m")}
    rot = parse_system((FIXTURES / "fib_reception_bug.kmc").read_text())
    golden["depths"]["fib_reception_bug.kmc"] = {
        "rotten": oracle.min_rotten_depth(rot, 1)}

    GOLDEN.parent.mkdir(exist_ok=True)
    GOLDEN.write_text(json.dumps(golden, indent=2) + "\n")
    print(f"wrote {GOLDEN}")
    for name, v in golden["verdicts"].items():
        print(f"  {name}: {v['class']} k={v['k']}")


if __name__ == "__main__":
    main()
