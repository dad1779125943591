"""Command-line interface.

Exit codes: 0 success, 1 verification mismatch, 2 invalid scenario or
arguments, 3 at least one node could not be planned, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from qcsync.errors import ScenarioError
from qcsync.pipeline import MODEL_NAMES, plan_scenario, simulate_scenario, verify_scenario
from qcsync.report import emit_plans, emit_report, report_to_dict
from qcsync.scenario import load_scenario

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--node", help="restrict to one destination node")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qcsync",
        description="Plan and simulate quantum/classical channel synchronization.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    plan = sub.add_parser("plan", help="compute per-node synchronization plans")
    plan.add_argument("model", choices=tuple(MODEL_NAMES),
                      help="linear: shorten classical fiber; pmf: lengthen PMF; "
                           "delays: reroute through a delay subset")
    _common(plan)

    sim = sub.add_parser("simulate", help="simulate the scenario links through the gate")
    _common(sim)
    sim.add_argument("--tolerance-ps", type=int, help="gate tolerance (default: scenario)")

    ver = sub.add_parser("verify", help="plan, simulate the planned links, check gaps")
    ver.add_argument("model", nargs="?", default="all",
                     choices=tuple(MODEL_NAMES) + ("all",))
    _common(ver)
    ver.add_argument("--tolerance-ps", type=int, help="gate tolerance (default: scenario)")
    ver.add_argument("--gap-tolerance-ps", type=int, default=0,
                     help="allowed |achieved - predicted| gap (default 0)")
    return parser


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cmd_plan(scenario, args) -> int:
    result = plan_scenario(scenario, MODEL_NAMES[args.model])
    _write(emit_plans(result.plans, result.errors, args.format), args.out)
    for node, exc in result.errors.items():
        print(f"node {node}: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_INFEASIBLE


def _cmd_simulate(scenario, args) -> int:
    report = simulate_scenario(scenario, args.tolerance_ps)
    _write(emit_report(report, args.format), args.out)
    print(
        f"simulate: {len(report.events)} packets, {report.continued} continued, "
        f"{report.dropped} dropped",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_verify(scenario, args) -> int:
    names = tuple(MODEL_NAMES) if args.model == "all" else (args.model,)
    if len(names) > 1 and args.format == "csv":
        print("verify: csv output needs a single model", file=sys.stderr)
        return EXIT_INVALID
    runs = [
        verify_scenario(scenario, MODEL_NAMES[name], args.tolerance_ps,
                        args.gap_tolerance_ps)
        for name in names
    ]
    if len(runs) == 1:
        text = emit_report(runs[0].report, args.format)
    else:
        doc = {name: report_to_dict(run.report) for name, run in zip(names, runs)}
        text = json.dumps(doc, indent=2) + "\n"
    _write(text, args.out)

    code = EXIT_OK
    for name, run in zip(names, runs):
        print(
            f"verify {name}: {len(run.plan.plans)} planned, {len(run.plan.errors)} "
            f"infeasible, {len(run.mismatches)} gap mismatches",
            file=sys.stderr,
        )
        for packet, node, expected, got in run.mismatches:
            print(f"  packet {packet} node {node}: expected t_delta {expected} ps, "
                  f"got {got} ps", file=sys.stderr)
        for node, exc in run.plan.errors.items():
            print(f"  node {node}: {type(exc).__name__}: {exc}", file=sys.stderr)
        if run.mismatches:
            code = EXIT_MISMATCH
        elif run.plan.errors and code == EXIT_OK:
            code = EXIT_INFEASIBLE
    return code


COMMANDS = {"plan": _cmd_plan, "simulate": _cmd_simulate, "verify": _cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
    except OSError as exc:
        print(f"qcsync: cannot read {args.scenario}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except ScenarioError as exc:
        for issue in exc.issues:
            print(f"{args.scenario}:{issue}", file=sys.stderr)
        return EXIT_INVALID

    if args.node is not None:
        try:
            scenario = scenario.restricted(args.node)
        except KeyError:
            print(f"qcsync: unknown node {args.node!r}", file=sys.stderr)
            return EXIT_INVALID

    try:
        return COMMANDS[args.command](scenario, args)
    except OSError as exc:
        print(f"qcsync: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
