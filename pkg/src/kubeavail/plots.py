"""Report figures rendered next to the delimited output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")  # headless: figures go to files
import matplotlib.pyplot as plt

from .runner import CORRESPONDENCE, SCENARIO_LABELS, OutputTable


def _outages(table: OutputTable) -> dict[str, float]:
    idx = 1 + table.columns.index("outage")
    return {row[0]: row[idx] for row in table.rows}


def save_outage_overview(tables: Sequence[OutputTable], path: Path) -> Path:
    """Grouped bars of mean outage per failure scenario and redundancy model."""
    by_name = {t.name: t for t in tables}
    no_red = _outages(by_name["no-redundancy-default"])
    n_way = _outages(by_name["n-way-default"])
    labels = [SCENARIO_LABELS[s] for s, _ in CORRESPONDENCE]
    x = range(len(labels))
    width = 0.38

    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    bars1 = ax.bar([i - width / 2 for i in x], [no_red[l] for l in labels],
                   width, label="No-Redundancy")
    bars2 = ax.bar([i + width / 2 for i in x], [n_way[l] for l in labels],
                   width, label="N-Way Active")
    ax.bar_label(bars1, fmt="%.2f", fontsize=8)
    ax.bar_label(bars2, fmt="%.2f", fontsize=8)
    ax.set_yscale("log")
    ax.set_ylabel("mean outage (s, log scale)")
    ax.set_xticks(list(x), [l.replace(" failure", "") for l in labels])
    ax.set_title("Service outage by failure scenario, default configuration")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_comparison_figure(tables: Sequence[OutputTable], path: Path) -> Path:
    """Three panels, one per scenario correspondence, comparing the
    orchestrator's redundancy models (plus the tuned variant where one
    exists) against the AMF baseline."""
    by_name = {t.name: t for t in tables}
    no_red = _outages(by_name["no-redundancy-default"])
    n_way = _outages(by_name["n-way-default"])
    grace = _outages(by_name["grace-zero"])
    responsive = _outages(by_name["responsive-node"])
    amf = _outages(by_name["amf-baseline"])
    tuned = {
        "pod-container": ("No-Red, zero grace", grace["No-Redundancy"]),
        "node": ("No-Red, responsive", responsive["No-Redundancy"]),
    }

    fig, axes = plt.subplots(1, 3, figsize=(11, 4.0))
    for ax, (k8s_scenario, amf_scenario) in zip(axes, CORRESPONDENCE):
        k8s_label = SCENARIO_LABELS[k8s_scenario]
        amf_label = SCENARIO_LABELS[amf_scenario]
        names = ["No-Red", "N-Way"]
        values = [no_red[k8s_label], n_way[k8s_label]]
        if k8s_scenario in tuned:
            names.append(tuned[k8s_scenario][0])
            values.append(tuned[k8s_scenario][1])
        names.append("AMF")
        values.append(amf[amf_label])
        colors = ["#4878a8"] * (len(names) - 1) + ["#b85450"]
        bars = ax.bar(names, values, color=colors)
        ax.bar_label(bars, fmt="%.2f", fontsize=8)
        ax.set_yscale("log")
        ax.set_title(k8s_label, fontsize=10)
        ax.tick_params(axis="x", labelsize=8, rotation=20)
        ax.grid(axis="y", alpha=0.3)
    axes[0].set_ylabel("mean outage (s, log scale)")
    fig.suptitle("Kubernetes healing vs AMF baseline")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(tables: Sequence[OutputTable], outdir: Path) -> list[Path]:
    """Render every report figure into the output directory."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return [
        save_outage_overview(tables, outdir / "outage_overview.png"),
        save_comparison_figure(tables, outdir / "kubernetes_vs_amf.png"),
    ]
