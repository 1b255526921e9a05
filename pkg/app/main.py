"""
tmdyn - Main Entry Point
Turing machines as symbolic dynamical systems: traces, head dynamics
and recognizers for the trace languages.

Usage:
    python -m app.main simulate --fixture PING_PONG --steps 4 --view T
    python -m app.main classify --machine m.json --width 1 --radius 6 --horizon 500
    python -m app.main build st --fixture PING_PONG --width 1 --nmax 8
    python -m app.main build sh --fixture LEFT --width 0 --nmax 6 --dot left.dot
    python -m app.main enumerate sh --fixture LEFT --nmax 3
    python -m app.main fixture BOUNCE_SHIFT --json bounce.json

Exit codes: 0 success, 2 input error, 3 budget/fit error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

# Ensure project root is in path
sys.path.insert(0, str(Path(__file__).parent.parent))

import structlog
from dotenv import load_dotenv

from core.config import Settings, load_settings
from core.errors import InputError, TmdynError, exit_code_for
from core.fixtures import fixture
from core.logger import EventType, Logger, setup_logging
from core.machine import Configuration, Head, TuringMachine
from core.schemas import load_configuration, load_machine
from helpers.utils import Timer, format_duration


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmdyn", description="Turing machines as symbolic dynamical systems")
    parser.add_argument("--settings", default="config.json", help="Settings file (default: config.json)")
    parser.add_argument("--log-json", action="store_true", help="Render process logs as JSON")
    parser.add_argument("--pretty", action="store_true", help="Indent the printed report")
    sub = parser.add_subparsers(dest="command", required=True)

    def machine_flags(p):
        p.add_argument("--machine", help="Machine JSON file")
        p.add_argument("--fixture", help="Corpus machine name instead of --machine")

    simulate = sub.add_parser("simulate", help="Trajectory dump")
    machine_flags(simulate)
    simulate.add_argument("--config", help="Configuration JSON file (default: blank tape, first state at 0)")
    simulate.add_argument("--steps", type=int, default=10)
    simulate.add_argument("--view", choices=["T", "TH", "TT"], default="T")

    classify = sub.add_parser("classify", help="Bounded-horizon head dynamics verdicts")
    machine_flags(classify)
    classify.add_argument("--config", help="Extra configuration to classify")
    classify.add_argument("--width", type=int, default=1)
    classify.add_argument("--radius", type=int)
    classify.add_argument("--horizon", type=int)
    classify.add_argument("--json", help="Write the report here")

    build = sub.add_parser("build", help="Build a recognizer and check it against the oracle")
    build.add_argument("target", choices=["st", "sh"])
    machine_flags(build)
    build.add_argument("--width", type=int, required=True, help="Zigzag width N; window phases use radius N+1")
    build.add_argument("--nmax", type=int)
    build.add_argument("--lmax", type=int)
    build.add_argument("--tmax", type=int)
    build.add_argument("--radius", type=int)
    build.add_argument("--horizon", type=int)
    build.add_argument("--budget", type=int)
    build.add_argument("--dot", help="Write DOT here")
    build.add_argument("--json", help="Write the recognizer and equivalence report here")

    enumerate_ = sub.add_parser("enumerate", help="Sorted language slice, one word per line")
    enumerate_.add_argument("target", choices=["st", "sh"])
    machine_flags(enumerate_)
    enumerate_.add_argument("--nmax", type=int, required=True, help="Word length")
    enumerate_.add_argument("--budget", type=int)

    fixture_ = sub.add_parser("fixture", help="Print a corpus machine as JSON")
    fixture_.add_argument("name")
    fixture_.add_argument("--json", help="Also write it here")
    return parser


def resolve_machine(args) -> TuringMachine:
    if bool(args.machine) == bool(args.fixture):
        raise InputError("give exactly one of --machine or --fixture")
    if args.fixture:
        return fixture(args.fixture)
    return load_machine(args.machine)


def resolve_configuration(path: Optional[str], machine: TuringMachine) -> Optional[Configuration]:
    if not path:
        return None
    return load_configuration(path, machine)


def _pick(flag, default):
    return default if flag is None else flag


def dispatch(args, settings: Settings, ledger: Optional[Logger]) -> str:
    """Run one command; returns the text to print."""
    from adapters import cli

    if args.command == "fixture":
        return cli.cmd_fixture(args.name, args.json)

    machine = resolve_machine(args)
    budget = _pick(getattr(args, "budget", None), settings.budgets.max_configurations)

    if args.command == "simulate":
        config = resolve_configuration(args.config, machine)
        if config is None:
            config = Configuration.uniform(machine.blank, Head(machine.states[0], 0))
        report = cli.cmd_simulate(machine, config, args.steps, args.view, ledger)
    elif args.command == "classify":
        report = cli.cmd_classify(
            machine,
            args.width,
            _pick(args.radius, settings.search.radius),
            _pick(args.horizon, settings.search.horizon),
            resolve_configuration(args.config, machine),
            settings.budgets.max_branches,
            ledger,
        )
        if args.json:
            report.write(args.json)
    elif args.command == "build":
        report = cli.cmd_build(
            machine,
            args.target,
            args.width,
            _pick(args.nmax, settings.search.nmax),
            _pick(args.lmax, settings.recognizer.l_max),
            _pick(args.tmax, settings.recognizer.t_max),
            _pick(args.radius, settings.search.radius),
            _pick(args.horizon, settings.search.horizon),
            budget,
            settings.budgets.max_branches,
            args.dot,
            args.json,
            ledger,
        )
    else:
        report, text = cli.cmd_enumerate(machine, args.target, args.nmax, budget, ledger)
        return text

    if args.pretty:
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    return report.to_json() + "\n"


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    load_dotenv()
    try:
        settings, errors = load_settings(args.settings)
    except TmdynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    setup_logging(settings.logging.level, json_output=args.log_json)
    log = structlog.get_logger("tmdyn")
    for item in errors:
        log.warning("settings.override_ignored", detail=item)

    ledger = Logger(settings.logging.model_dump())
    try:
        with Timer(args.command) as timer:
            output = dispatch(args, settings, ledger)
        sys.stdout.write(output)
    except TmdynError as exc:
        code = exit_code_for(exc)
        log.error("command.failed", command=args.command, error=str(exc), exit_code=code)
        ledger.log(EventType.ERROR, {"error": str(exc), "type": type(exc).__name__}, command=args.command, outcome=str(code))
        print(f"error: {exc}", file=sys.stderr)
        return code
    log.info("command.done", command=args.command, elapsed=format_duration(timer.elapsed))
    return 0


if __name__ == "__main__":
    sys.exit(main())
