"""dilu-sim command line.

Subcommands::

    dilu-sim profile  [--models NAME ...] [--slo NAME=MS ...] [--models-file F] [--out F]
    dilu-sim simulate --scenario F --out DIR [--seed N] [--mode MODE]
    dilu-sim sweep    --scenario F --out DIR --axis AXIS --points V,V,... [--mode MODE ...]
    dilu-sim report   DIR [DIR ...] [--out F]

Exit codes: 0 success, 1 usage or invalid input, 2 invariant abort, 3 I/O failure.
"""

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

import pandas as pd
from pydantic import ValidationError

from src.models.error import (
    InvariantViolationError,
    OutputIOError,
    SimulationError,
    ValidationFailedError,
)
from src.models.profiling import ProfileReport, ProfileRequest
from src.models.scenario import BaselineMode, Scenario, TraceFilePattern
from src.services.experiments import SweepAxis, sweep
from src.services.perfmodel import ModelCatalog, load_model_catalog
from src.services.profiler import build_profile_report
from src.services.simulator import run_scenario
from src.services.storage import (
    comparison_table,
    read_metrics,
    write_frame,
    write_json,
    write_run,
    write_text,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_IO = 3

SWEEP_FILE = "sweep.csv"
REPORT_FILE = "profile.json"
TRIAL_COLUMNS = [
    "model",
    "kind",
    "method",
    "trials",
    "traversal_trials",
    "ibs",
    "request_smr",
    "limit_smr",
    "error",
]


class UsageError(Exception):
    """Bad command-line input detected after argument parsing."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with :data:`EXIT_USAGE`."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _slo_pair(text: str) -> tuple[str, float]:
    name, sep, value = text.rpartition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=MS, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"SLO for {name!r} is not a number") from None


def _points(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers like 1,1.5,2; got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dilu-sim", description="GPU resourcing-on-demand simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    profile = sub.add_parser("profile", help="profile built-in or supplied model profiles")
    profile.add_argument(
        "--models", nargs="*", default=None, help="model names; all catalog models when omitted"
    )
    profile.add_argument(
        "--slo",
        type=_slo_pair,
        action="append",
        default=[],
        metavar="NAME=MS",
        help="inference SLO override, repeatable",
    )
    profile.add_argument("--models-file", type=Path, help="JSON model catalog to profile")
    profile.add_argument(
        "--training", action="store_true", help="also profile each model as a training job"
    )
    profile.add_argument("--out", type=Path, default=Path(REPORT_FILE), help="report JSON path")

    modes = [m.value for m in BaselineMode]
    simulate = sub.add_parser("simulate", help="run one scenario")
    simulate.add_argument("--scenario", type=Path, required=True)
    simulate.add_argument("--out", type=Path, required=True, help="output directory")
    simulate.add_argument("--seed", type=int, help="override the scenario seed")
    simulate.add_argument("--mode", choices=modes, help="override the baseline mode")

    grid = sub.add_parser("sweep", help="run a parameter sweep")
    grid.add_argument("--scenario", type=Path, required=True)
    grid.add_argument("--out", type=Path, required=True, help="output directory")
    grid.add_argument("--axis", choices=[a.value for a in SweepAxis], required=True)
    grid.add_argument("--points", type=_points, required=True, metavar="V,V,...")
    grid.add_argument(
        "--mode",
        choices=modes,
        action="append",
        dest="modes",
        help="baseline to include, repeatable; the scenario's own when omitted",
    )
    grid.add_argument("--seed", type=int, help="override the scenario seed")

    report = sub.add_parser("report", help="compare finished runs")
    report.add_argument("dirs", nargs="*", type=Path, help="run output directories")
    report.add_argument("--out", type=Path, help="write the comparison table as CSV")
    return parser


def load_scenario(path: Path, seed: int | None = None) -> Scenario:
    """Parse a scenario file; trace paths are resolved against its directory.

    Raises:
        UsageError: If the file cannot be read
        pydantic.ValidationError: If it does not match the schema
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read scenario {path}: {e}") from e
    scenario = Scenario.model_validate_json(text)
    base = path.resolve().parent
    functions = []
    for entry in scenario.functions:
        workload = entry.workload
        if isinstance(workload, TraceFilePattern) and not Path(workload.path).is_absolute():
            resolved = workload.model_copy(update={"path": str(base / workload.path)})
            entry = entry.model_copy(update={"workload": resolved})
        functions.append(entry)
    update: dict[str, object] = {"functions": functions}
    if seed is not None:
        update["seed"] = seed
    return scenario.model_copy(update=update)


def _profile_requests(args: argparse.Namespace, catalog: ModelCatalog) -> list[ProfileRequest]:
    names = catalog.names() if args.models is None else args.models
    slos = dict(args.slo)
    requests = [
        ProfileRequest(model=name, slo_ms=slos.get(name), with_traversal=True) for name in names
    ]
    if args.training:
        requests += [ProfileRequest(model=name, kind="training") for name in names]
    return requests


def _trial_table(report: ProfileReport) -> pd.DataFrame:
    rows = [
        {
            "model": e.model,
            "kind": e.kind,
            "method": e.result.method if e.result else None,
            "trials": e.result.trial_count if e.result else None,
            "traversal_trials": e.traversal.trial_count if e.traversal else None,
            "ibs": e.result.quota.ibs if e.result else None,
            "request_smr": e.result.quota.request_smr if e.result else None,
            "limit_smr": e.result.quota.limit_smr if e.result else None,
            "error": e.error,
        }
        for e in report.entries
    ]
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


def cmd_profile(args: argparse.Namespace) -> int:
    try:
        catalog = load_model_catalog(args.models_file)
    except OSError as e:
        raise UsageError(f"cannot read model catalog {args.models_file}: {e}") from e
    report = build_profile_report(_profile_requests(args, catalog), catalog)
    write_json(args.out, report)
    if report.entries:
        print(_trial_table(report).to_string(index=False))
    logger.info(f"Profiled {len(report.entries)} entries into {args.out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario, args.seed)
    if args.mode:
        scenario = scenario.model_copy(update={"baseline_mode": BaselineMode(args.mode)})
    result = run_scenario(scenario)
    write_run(args.out, result)
    print(comparison_table({scenario.baseline_mode.value: result.report}).to_string())
    return EXIT_OK


def _sweep_threads() -> int:
    raw = os.getenv("DILU_SIM_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError:
        raise UsageError(f"DILU_SIM_THREADS must be an integer, got {raw!r}") from None
    if threads < 1:
        raise UsageError(f"DILU_SIM_THREADS must be at least 1, got {threads}")
    return threads


def cmd_sweep(args: argparse.Namespace) -> int:
    if not args.points:
        raise UsageError("--points needs at least one value")
    scenario = load_scenario(args.scenario, args.seed)
    modes = [BaselineMode(m) for m in args.modes] if args.modes else None
    threads = _sweep_threads()
    table, _ = sweep(scenario, SweepAxis(args.axis), args.points, modes, threads=threads)
    write_frame(args.out / SWEEP_FILE, table)
    print(table.to_string(index=False))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if not args.dirs:
        raise UsageError("report needs at least one run directory")
    reports = {}
    for run_dir in args.dirs:
        report = read_metrics(run_dir)
        if report is not None:
            name = run_dir.name if run_dir.name not in reports else str(run_dir)
            reports[name] = report
    if not reports:
        raise UsageError("none of the given directories holds a readable metrics.json")
    table = comparison_table(reports)
    if args.out:
        write_text(args.out, table.to_csv(lineterminator="\n"))
    print(table.to_string())
    return EXIT_OK


_COMMANDS = {
    "profile": cmd_profile,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point for the ``dilu-sim`` console script; returns the exit code."""
    logging.basicConfig(
        level=os.getenv("DILU_SIM_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InvariantViolationError as e:
        logger.error(f"Run aborted: {e.message}", extra={"details": e.details})
        return EXIT_INVARIANT
    except OutputIOError as e:
        logger.error(e.message, extra={"details": e.details})
        return EXIT_IO
    except (UsageError, ValidationError, ValidationFailedError, SimulationError) as e:
        print(f"dilu-sim: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
