"""Batch experiment driver.

Runs seeded repetitions of scenario x profile x redundancy, aggregates the
per-run metrics, and renders report tables.  The five canonical batteries
cover: no redundancy and two-way active redundancy under the default
profile, the grace-period-zero variant of the pod-container scenario, the
responsive node-handling variant of the node scenario, and the AMF baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .amf import DEFAULT_AMF_PROFILE, AmfProfile, AmfScenarioKind, run_amf
from .cluster import Cluster, build_cluster
from .config import ConfigProfile, get_profile
from .engine import Trace
from .failures import FailureKind, FailureScenario, TargetSelector, inject
from .metrics import (AggregateReport, MetricsReport, SCENARIO_KINDS,
                      aggregate, compute_metrics, csv_row)

K8S = "kubernetes"
AMF = "amf"
AMF_SCENARIOS = tuple(k.value for k in AmfScenarioKind)

SCENARIO_LABELS = {
    "app-container": "App container failure",
    "pod-container": "Pod container failure",
    "node": "Node failure",
    "process": "Process failure",
    "vm": "VM failure",
    "host": "Host failure",
}

# scenario correspondence between the two systems
CORRESPONDENCE = (("app-container", "process"),
                  ("pod-container", "vm"),
                  ("node", "host"))

DEFAULT_REPETITIONS = 10
DEFAULT_BASE_SEED = 76
DEFAULT_INJECTION_TIME = 120.0
DEFAULT_NODE_COUNT = 2


class RunValidationError(RuntimeError):
    """A repetition produced an invalid trace or failed to converge."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment battery: repeated seeded runs of a single scenario."""

    scenario: str
    system: str = K8S
    profile: str = "default"
    overrides: Mapping[str, float] = field(default_factory=dict)
    replicas: int = 1
    repetitions: int = DEFAULT_REPETITIONS
    base_seed: int = DEFAULT_BASE_SEED
    injection_time: float = DEFAULT_INJECTION_TIME
    node_count: int = DEFAULT_NODE_COUNT

    def __post_init__(self):
        if self.system not in (K8S, AMF):
            raise ValueError(f"unknown system {self.system!r}")
        valid = SCENARIO_KINDS if self.system == K8S else AMF_SCENARIOS
        if self.scenario not in valid:
            raise ValueError(
                f"unknown {self.system} scenario {self.scenario!r} (valid: {', '.join(valid)})")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.replicas < 1:
            raise ValueError("replicas must be at least 1")
        if self.injection_time < 0:
            raise ValueError("injection_time must be non-negative")


@dataclass(frozen=True)
class OutputTable:
    """Rendered experiment battery: one row of metric means per scenario."""

    name: str
    title: str
    label_header: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    meta: Mapping[str, object] = field(default_factory=dict)


def simulate_once(spec: ExperimentSpec, seed: int,
                  profile: Optional[ConfigProfile] = None) -> tuple[MetricsReport, Trace, Cluster]:
    """One seeded run: build, inject, run to quiescence, compute metrics."""
    if profile is None:
        profile = get_profile(spec.profile, spec.overrides)
    cluster = build_cluster(spec.node_count, profile, spec.replicas, seed)
    kind = FailureKind(spec.scenario)
    target = (TargetSelector.NODE_HOSTING_FIRST_POD if kind is FailureKind.NODE_CRASH
              else TargetSelector.FIRST_POD)
    scenario = FailureScenario(kind=kind, target=target, at=spec.injection_time)
    inject(scenario, cluster)
    trace = cluster.run(horizon=spec.injection_time + 3600.0)
    if not cluster.converged():
        raise RunValidationError(f"seed {seed}: cluster did not reconverge")
    report = compute_metrics(trace, scenario)
    return report, trace, cluster


def run_experiment(spec: ExperimentSpec,
                   amf_profile: AmfProfile = DEFAULT_AMF_PROFILE,
                   extra_profiles: Optional[Mapping[str, ConfigProfile]] = None) -> AggregateReport:
    """Run every repetition of the spec and aggregate the per-run metrics."""
    seeds = [spec.base_seed + i for i in range(spec.repetitions)]
    reports = []
    if spec.system == AMF:
        kind = AmfScenarioKind(spec.scenario)
        for seed in seeds:
            reports.append(run_amf(kind, amf_profile, seed))
        return aggregate(reports, seeds)
    profile = get_profile(spec.profile, spec.overrides, extra_profiles)
    for seed in seeds:
        try:
            report, _, _ = simulate_once(spec, seed, profile)
        except RunValidationError:
            raise
        except Exception as exc:
            raise RunValidationError(f"seed {seed}: {exc}") from exc
        reports.append(report)
    return aggregate(reports, seeds)


METRIC_COLUMNS = ("profile", "replicas", "seed", "reaction", "repair", "recovery", "outage")


def _metric_row(label: str, profile_label: str, replicas: Optional[int],
                base_seed: int, agg: AggregateReport) -> tuple:
    return (label, profile_label, replicas, base_seed,
            agg.reaction, agg.repair, agg.recovery, agg.outage)


def reproduce_tables(base_seed: int = DEFAULT_BASE_SEED,
                     repetitions: int = DEFAULT_REPETITIONS,
                     injection_time: float = DEFAULT_INJECTION_TIME) -> list[OutputTable]:
    """Run the five canonical batteries and render one table per battery."""

    def battery(scenario, profile, overrides, replicas):
        return run_experiment(ExperimentSpec(
            scenario=scenario, profile=profile, overrides=overrides, replicas=replicas,
            repetitions=repetitions, base_seed=base_seed, injection_time=injection_time))

    tables: list[OutputTable] = []
    common_meta = {"base_seed": base_seed, "repetitions": repetitions}

    rows = tuple(
        _metric_row(SCENARIO_LABELS[s], "default", 1, base_seed, battery(s, "default", {}, 1))
        for s in SCENARIO_KINDS)
    tables.append(OutputTable(
        name="no-redundancy-default",
        title="Kubernetes, No-Redundancy, default configuration",
        label_header="failure trigger", columns=METRIC_COLUMNS, rows=rows,
        meta=dict(common_meta, profile="default", replicas=1)))

    rows = tuple(
        _metric_row(SCENARIO_LABELS[s], "default", 2, base_seed, battery(s, "default", {}, 2))
        for s in SCENARIO_KINDS)
    tables.append(OutputTable(
        name="n-way-default",
        title="Kubernetes, N-Way Active (2 replicas), default configuration",
        label_header="failure trigger", columns=METRIC_COLUMNS, rows=rows,
        meta=dict(common_meta, profile="default", replicas=2)))

    grace_zero = {"grace_period": 0.0}
    rows = (
        _metric_row("No-Redundancy", "grace-zero", 1, base_seed,
                    battery("pod-container", "default", grace_zero, 1)),
        _metric_row("N-Way Active", "grace-zero", 2, base_seed,
                    battery("pod-container", "default", grace_zero, 2)),
    )
    tables.append(OutputTable(
        name="grace-zero",
        title="Kubernetes, pod-container failure, zero grace period",
        label_header="redundancy model", columns=METRIC_COLUMNS, rows=rows,
        meta=dict(common_meta, profile="default", overrides=grace_zero,
                  scenario="pod-container")))

    rows = (
        _metric_row("No-Redundancy", "responsive", 1, base_seed,
                    battery("node", "responsive", {}, 1)),
        _metric_row("N-Way Active", "responsive", 2, base_seed,
                    battery("node", "responsive", {}, 2)),
    )
    tables.append(OutputTable(
        name="responsive-node",
        title="Kubernetes, node failure, most responsive configuration",
        label_header="redundancy model", columns=METRIC_COLUMNS, rows=rows,
        meta=dict(common_meta, profile="responsive", scenario="node")))

    rows = tuple(
        _metric_row(SCENARIO_LABELS[k.value], "amf", None, base_seed,
                    run_experiment(ExperimentSpec(
                        scenario=k.value, system=AMF,
                        repetitions=repetitions, base_seed=base_seed)))
        for k in AmfScenarioKind)
    tables.append(OutputTable(
        name="amf-baseline",
        title="AMF-managed deployment (active + spare), calibrated baseline",
        label_header="failure trigger", columns=METRIC_COLUMNS, rows=rows,
        meta=dict(common_meta, system=AMF)))

    return tables


def compare(k8s_table: OutputTable, amf_table: OutputTable) -> OutputTable:
    """Side-by-side outage columns plus the outage ratio, matched by the
    container-process / pod-VM / node-host scenario correspondence."""
    out_idx = k8s_table.columns.index("outage")
    k8s_rows = {row[0]: row for row in k8s_table.rows}
    amf_rows = {row[0]: row for row in amf_table.rows}
    rows = []
    for k8s_scenario, amf_scenario in CORRESPONDENCE:
        k8s_label = SCENARIO_LABELS[k8s_scenario]
        amf_label = SCENARIO_LABELS[amf_scenario]
        if k8s_label not in k8s_rows or amf_label not in amf_rows:
            raise ValueError(
                f"mismatched scenario sets: need {k8s_label!r} and {amf_label!r}")
        k8s_outage = k8s_rows[k8s_label][1 + out_idx]
        amf_outage = amf_rows[amf_label][1 + out_idx]
        ratio = k8s_outage / amf_outage if amf_outage else float("inf")
        rows.append((f"{k8s_label} vs {amf_label.lower()}", k8s_outage, amf_outage, ratio))
    return OutputTable(
        name="comparison",
        title="Outage comparison: Kubernetes vs AMF baseline",
        label_header="scenario",
        columns=("kubernetes_outage", "amf_outage", "ratio"),
        rows=tuple(rows),
        meta={"k8s_table": k8s_table.name, "amf_table": amf_table.name})


def _format_cell(value, places: int, missing: str) -> str:
    if value is None:
        return missing
    if isinstance(value, float):
        return f"{value:.{places}f}"
    return str(value)


def emit(table: OutputTable, format: str = "csv") -> str:
    """Deterministic text rendering of a table as CSV or markdown."""
    if format == "csv":
        lines = [",".join((table.label_header.replace(" ", "_"),) + table.columns)]
        for row in table.rows:
            cells = [str(row[0])] + [_format_cell(v, 6, "") for v in row[1:]]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    if format == "markdown":
        headers = [table.label_header] + [c.replace("_", " ") for c in table.columns]
        lines = [f"### {table.title}", ""]
        lines.append("| " + " | ".join(headers) + " |")
        lines.append("|" + "|".join([" --- "] * len(headers)) + "|")
        for row in table.rows:
            cells = [str(row[0])] + [_format_cell(v, 3, "-") for v in row[1:]]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r} (use 'csv' or 'markdown')")


# Calibration targets for --check self-verification: mean outage per row
# with the accepted tolerance band.
REFERENCE_TARGETS: Mapping[str, tuple[tuple[str, float, float], ...]] = {
    "no-redundancy-default": (
        ("App container failure", 1.766, 0.5),
        ("Pod container failure", 32.019, 1.5),
        ("Node failure", 300.852, 6.0),
    ),
    "n-way-default": (
        ("App container failure", 0.579, 0.3),
        ("Pod container failure", 0.730, 0.3),
        ("Node failure", 38.582, 4.0),
    ),
    "grace-zero": (
        ("No-Redundancy", 4.045, 0.8),
        ("N-Way Active", 0.554, 0.3),
    ),
    "responsive-node": (
        ("No-Redundancy", 3.974, 0.8),
        ("N-Way Active", 0.872, 0.4),
    ),
    "amf-baseline": (
        ("Process failure", 0.795, 0.05),
        ("VM failure", 3.351, 0.05),
        ("Host failure", 3.346, 0.05),
    ),
}


@dataclass(frozen=True)
class TargetCheck:
    table: str
    label: str
    target: float
    tolerance: float
    actual: float

    @property
    def passed(self) -> bool:
        return abs(self.actual - self.target) <= self.tolerance


def check_tables(tables: Sequence[OutputTable],
                 targets: Optional[Mapping] = None) -> list[TargetCheck]:
    """Compare rendered tables against the embedded calibration targets."""
    if targets is None:
        targets = REFERENCE_TARGETS
    by_name = {t.name: t for t in tables}
    checks = []
    for name, rows in targets.items():
        table = by_name.get(name)
        if table is None:
            raise ValueError(f"missing table {name!r}")
        out_idx = 1 + table.columns.index("outage")
        actual = {row[0]: row[out_idx] for row in table.rows}
        for label, target, tolerance in rows:
            if label not in actual:
                raise ValueError(f"table {name!r} is missing row {label!r}")
            checks.append(TargetCheck(name, label, target, tolerance, actual[label]))
    return checks


def per_run_csv(spec: ExperimentSpec, agg: AggregateReport) -> str:
    """Per-run CSV rows for one experiment battery."""
    from .metrics import CSV_HEADER
    replicas = None if spec.system == AMF else spec.replicas
    lines = [CSV_HEADER]
    for seed, report in zip(agg.seeds, agg.runs):
        lines.append(csv_row(spec.scenario, spec.profile, replicas, seed, report))
    return "\n".join(lines) + "\n"
