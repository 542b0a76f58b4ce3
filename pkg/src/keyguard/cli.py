"""Command line entry point: ``keyguard run|bench|validate <scenario>``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Iterable

from keyguard.analysis import compare_passthrough, run_latency_bench
from keyguard.errors import ScenarioError, TraceTooShort
from keyguard.hooks import HookRegistration
from keyguard.report import RunReport, emit_report
from keyguard.scenario import load_scenario
from keyguard.simulation import run

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DESYNC = 3


def run_scenario(
    path: str | Path,
    paired_baseline: bool = False,
    extra_hooks: Iterable[HookRegistration] = (),
) -> tuple[RunReport | None, int]:
    """Load, replay and analyse a scenario. Returns ``(report, exit_code)``.

    The report is ``None`` only when the scenario is invalid.
    """
    try:
        scenario = load_scenario(path)
    except ScenarioError:
        return None, EXIT_INVALID
    result = run(scenario, extra_hooks)
    diff = None
    if paired_baseline:
        baseline = run(scenario.with_keyguard(False))
        diff = compare_passthrough(result, baseline)
    report = RunReport.from_run(scenario, result, passthrough=diff)
    return report, EXIT_DESYNC if result.desync else EXIT_OK


def _write(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _cmd_run(args) -> int:
    try:
        load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report, code = run_scenario(args.scenario, paired_baseline=args.paired)
    _write(emit_report(report, args.format), args.out)
    if code == EXIT_DESYNC:
        print("defense desync detected; audit trail ends at the fault", file=sys.stderr)
    return code


def _cmd_bench(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
        stats = run_latency_bench(scenario, args.reps)
    except (ScenarioError, TraceTooShort, ValueError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result = run(scenario)
    report = RunReport.from_run(scenario, result, latency=stats)
    _write(emit_report(report, args.format), args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"ok: {scenario.key_steps} key events, {len(scenario.fields)} fields, {len(scenario.rules)} rules")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="keyguard", description="Keylogging defense simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replay a scenario and report leakage")
    p.add_argument("scenario")
    p.add_argument("--paired", action="store_true", help="also run with an empty hook registry and diff")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bench", help="time the hooked and unhooked dispatch paths")
    p.add_argument("scenario")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
