"""Command-line front door.

    invarsets run <config.json> [--report PATH] [--csv PATH] [overrides]
    invarsets run-all <dir> [--report-dir PATH]
    invarsets export <config.json> --csv PATH

Exit codes: 0 = pass, 1 = fail / borderline / hypothesis-error,
2 = configuration error.  ``run-all`` exits 0 only when every scenario's
verdict matches its (optional) ``expected_verdict`` field, which defaults
to "pass"; this lets shipped negative controls count as expected.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import InvarsetsError, UsageError
from .report import (
    export_trajectory,
    load_scenario,
    run_scenario,
    scenario_trajectory,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _apply_overrides(config: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "t_end", None) is not None:
        config["t_end"] = args.t_end
    if getattr(args, "rank_tol", None) is not None:
        config["rank_tol"] = args.rank_tol
    if getattr(args, "abs_tol", None) is not None:
        config.setdefault("integ", {})["abs_tol"] = args.abs_tol
    if getattr(args, "rel_tol", None) is not None:
        config.setdefault("integ", {})["rel_tol"] = args.rel_tol
    if getattr(args, "sample_count", None) is not None:
        config.setdefault("integ", {})["sample_count"] = args.sample_count
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    for item in getattr(args, "tolerance", None) or []:
        key, _, value = item.partition("=")
        if not _:
            raise UsageError(f"--tolerance expects KEY=VALUE, got '{item}'")
        config.setdefault("tolerances", {})[key] = float(value)
    return config


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--t-end", type=float, dest="t_end", help="override t_end")
    parser.add_argument("--rank-tol", type=float, dest="rank_tol", help="override rank tolerance")
    parser.add_argument("--abs-tol", type=float, dest="abs_tol", help="override integrator abs_tol")
    parser.add_argument("--rel-tol", type=float, dest="rel_tol", help="override integrator rel_tol")
    parser.add_argument(
        "--sample-count", type=int, dest="sample_count", help="override sample count"
    )
    parser.add_argument("--seed", type=int, help="override the random seed")
    parser.add_argument(
        "--tolerance",
        action="append",
        metavar="KEY=VALUE",
        help="override a named tolerance (repeatable), e.g. --tolerance deviation=1e-7",
    )


def _verdict_exit(verdict: str) -> int:
    return EXIT_PASS if verdict == "pass" else EXIT_FAIL


def _cmd_run(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_scenario(args.config), args)
    report = run_scenario(config)
    print(report.to_json())
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n")
    if args.csv:
        traj, quantity, system = scenario_trajectory(config)
        export_trajectory(traj, quantity, args.csv, system.component_names)
    return _verdict_exit(report.verdict)


def _cmd_run_all(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise UsageError(f"not a directory: {directory}")
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise UsageError(f"no scenario files (*.json) in {directory}")
    rows = []
    all_expected = True
    for path in paths:
        config = load_scenario(path)
        expected = str(config.get("expected_verdict", "pass"))
        report = run_scenario(config)
        ok = report.verdict == expected
        all_expected = all_expected and ok
        rows.append((path.name, report.check, report.verdict, expected, ok))
        if args.report_dir:
            out = Path(args.report_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{path.stem}.report.json").write_text(report.to_json() + "\n")
    name_w = max(len(r[0]) for r in rows)
    check_w = max(len(r[1]) for r in rows)
    print(f"{'scenario':<{name_w}}  {'check':<{check_w}}  verdict           expected  ok")
    for name, check, verdict, expected, ok in rows:
        print(f"{name:<{name_w}}  {check:<{check_w}}  {verdict:<16}  {expected:<8}  {'yes' if ok else 'NO'}")
    print(f"{sum(1 for r in rows if r[4])}/{len(rows)} scenarios matched their expected verdict")
    return EXIT_PASS if all_expected else EXIT_FAIL


def _cmd_export(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_scenario(args.config), args)
    traj, quantity, system = scenario_trajectory(config)
    export_trajectory(traj, quantity, args.csv, system.component_names)
    print(f"wrote {len(traj)} samples to {args.csv}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invarsets",
        description="Certify invariant sets built from conserved quantities of ODE flows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.add_argument("--report", help="also write the JSON report to this path")
    p_run.add_argument("--csv", help="also export the scenario trajectory as CSV")
    _add_override_flags(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_all = sub.add_parser("run-all", help="run every scenario in a directory")
    p_all.add_argument("directory", help="directory of scenario JSON files")
    p_all.add_argument("--report-dir", help="write one JSON report per scenario here")
    p_all.set_defaults(fn=_cmd_run_all)

    p_export = sub.add_parser("export", help="export a scenario trajectory as CSV")
    p_export.add_argument("config", help="path to a scenario JSON file")
    p_export.add_argument("--csv", required=True, help="output CSV path")
    _add_override_flags(p_export)
    p_export.set_defaults(fn=_cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvarsetsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
