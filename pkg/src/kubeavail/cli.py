"""Command-line experiment runner.

Exit codes: 0 on success, 2 on validation errors, 3 when --check finds a
result outside its calibration band.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import runner
from .config import load_config
from .runner import (AMF, DEFAULT_BASE_SEED, DEFAULT_INJECTION_TIME,
                     DEFAULT_REPETITIONS, K8S, ExperimentSpec,
                     RunValidationError, check_tables, compare, emit,
                     per_run_csv, reproduce_tables, run_experiment)

ALL_SCENARIOS = ("app-container", "pod-container", "node", "process", "vm", "host")


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ValueError(f"override {pair!r} is not of the form name=value")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = float(value)
    return overrides


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kubeavail",
        description="Simulate orchestrated-service failure handling and report availability metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment battery")
    run_p.add_argument("--system", choices=(K8S, AMF), default=None)
    run_p.add_argument("--scenario", choices=ALL_SCENARIOS, default=None)
    run_p.add_argument("--profile", default=None)
    run_p.add_argument("--override", action="append", metavar="NAME=VALUE",
                       help="profile field override, repeatable")
    run_p.add_argument("--replicas", type=int, default=None)
    run_p.add_argument("--repetitions", type=int, default=None)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--injection-time", type=float, default=None)
    run_p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    run_p.add_argument("--out", default="-", help="output file, '-' for stdout")
    run_p.add_argument("--per-run", metavar="PATH", default=None,
                       help="also write per-run CSV rows to PATH")
    run_p.add_argument("--config", metavar="JSON", default=None)

    tables_p = sub.add_parser("tables", help="reproduce the five canonical report tables")
    tables_p.add_argument("--seed", type=int, default=DEFAULT_BASE_SEED)
    tables_p.add_argument("--repetitions", type=int, default=DEFAULT_REPETITIONS)
    tables_p.add_argument("--injection-time", type=float, default=DEFAULT_INJECTION_TIME)
    tables_p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    tables_p.add_argument("--out", default="reports", help="output directory")
    tables_p.add_argument("--no-figures", action="store_true",
                          help="skip rendering PNG figures")
    tables_p.add_argument("--check", action="store_true",
                          help="verify outages against the calibration bands")

    cmp_p = sub.add_parser("compare", help="compare orchestrator outages against the AMF baseline")
    cmp_p.add_argument("--seed", type=int, default=DEFAULT_BASE_SEED)
    cmp_p.add_argument("--repetitions", type=int, default=DEFAULT_REPETITIONS)
    cmp_p.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    cmp_p.add_argument("--out", default="-")
    return parser


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _cmd_run(args) -> int:
    file_conf = load_config(args.config) if args.config else {"profiles": {}, "experiment": {}}
    conf = dict(file_conf["experiment"])

    def pick(flag, key, fallback):
        return flag if flag is not None else conf.get(key, fallback)

    spec = ExperimentSpec(
        scenario=pick(args.scenario, "scenario", "node"),
        system=pick(args.system, "system", K8S),
        profile=pick(args.profile, "profile", "default"),
        overrides=_parse_overrides(args.override) or conf.get("overrides", {}),
        replicas=pick(args.replicas, "replicas", 1),
        repetitions=pick(args.repetitions, "repetitions", DEFAULT_REPETITIONS),
        base_seed=pick(args.seed, "seed", DEFAULT_BASE_SEED),
        injection_time=pick(args.injection_time, "injection_time", DEFAULT_INJECTION_TIME),
    )
    agg = run_experiment(spec, extra_profiles=file_conf["profiles"])
    label = runner.SCENARIO_LABELS[spec.scenario]
    replicas = None if spec.system == AMF else spec.replicas
    table = runner.OutputTable(
        name="experiment", title=f"{spec.system}: {label}",
        label_header="scenario", columns=runner.METRIC_COLUMNS,
        rows=(runner._metric_row(label, spec.profile, replicas, spec.base_seed, agg),),
        meta={"repetitions": spec.repetitions})
    _write(emit(table, args.format), args.out)
    if args.per_run:
        _write(per_run_csv(spec, agg), args.per_run)
    return 0


def _cmd_tables(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    tables = reproduce_tables(base_seed=args.seed, repetitions=args.repetitions,
                              injection_time=args.injection_time)
    ext = "csv" if args.format == "csv" else "md"
    for table in tables:
        (outdir / f"{table.name}.{ext}").write_text(emit(table, args.format))
    by_name = {t.name: t for t in tables}
    comparison = compare(by_name["no-redundancy-default"], by_name["amf-baseline"])
    (outdir / f"comparison.{ext}").write_text(emit(comparison, args.format))
    written = [f"{t.name}.{ext}" for t in tables] + [f"comparison.{ext}"]
    if not args.no_figures:
        from .plots import render_report_figures
        written += [p.name for p in render_report_figures(tables, outdir)]
    print(f"wrote {', '.join(written)} to {outdir}")

    if args.check:
        checks = check_tables(tables)
        failed = [c for c in checks if not c.passed]
        for c in checks:
            status = "ok" if c.passed else "OUT OF BAND"
            print(f"check {c.table} / {c.label}: {c.actual:.3f} "
                  f"vs {c.target:.3f} +/- {c.tolerance:.3f} [{status}]")
        if failed:
            return 3
    return 0


def _cmd_compare(args) -> int:
    tables = reproduce_tables(base_seed=args.seed, repetitions=args.repetitions)
    by_name = {t.name: t for t in tables}
    comparison = compare(by_name["no-redundancy-default"], by_name["amf-baseline"])
    _write(emit(comparison, args.format), args.out)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "tables":
            return _cmd_tables(args)
        return _cmd_compare(args)
    except (ValueError, RunValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
