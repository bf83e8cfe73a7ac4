"""Figure and table rendering for assessment reports.

Writes a density-distribution figure, a posterior overview figure, and a
delimited posterior table next to the main report. matplotlib is
imported lazily so the assessment pipeline stays import-light.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .assess import AssessmentReport

_KIND_COLORS = {
    "factor": "#4878cf",
    "activity": "#d65f5f",
    "metric": "#6acc65",
}


def _matplotlib():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def write_posterior_table(report: AssessmentReport, path: Path) -> Path:
    """Delimited per-state posterior table (one row per node state)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["node", "kind", "name", "state", "probability",
                         "mean", "sd"])
        for entry in report.posteriors:
            for state, prob in zip(entry.states, entry.probabilities):
                writer.writerow([
                    entry.node, entry.kind, entry.name, state,
                    f"{prob:.12g}",
                    "" if entry.mean is None else f"{entry.mean:.12g}",
                    "" if entry.sd is None else f"{entry.sd:.12g}",
                ])
    return path


def render_density_figure(report: AssessmentReport, path: Path) -> Path:
    """Posterior distribution of the predicted vulnerability density."""
    plt = _matplotlib()
    metric = next(e for e in report.posteriors if e.kind == "metric")
    n = len(metric.probabilities)

    fig, ax = plt.subplots(figsize=(7.0, 3.8))
    xs = range(len(metric.probabilities))
    ax.bar(xs, metric.probabilities, width=0.9, color=_KIND_COLORS["metric"],
           edgecolor="none")
    ax.set_xticks([0, n // 2, n - 1])
    ax.set_xticklabels([metric.states[0], metric.states[n // 2], metric.states[n - 1]],
                       fontsize=8)
    ax.set_ylabel("probability")
    ax.set_xlabel(metric.name)
    ax.set_title(
        f"{report.system.name}: density mean {report.density_mean:.4f}, "
        f"sd {report.density_sd:.4f}"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_posterior_figure(report: AssessmentReport, path: Path) -> Path:
    """Grid of per-node posterior bars, factors through metric."""
    plt = _matplotlib()
    entries = list(report.posteriors)
    ncols = 4
    nrows = max(1, math.ceil(len(entries) / ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 2.2 * nrows),
                             squeeze=False)
    for i, entry in enumerate(entries):
        ax = axes[i // ncols][i % ncols]
        color = _KIND_COLORS.get(entry.kind, "#888888")
        ax.bar(range(len(entry.probabilities)), entry.probabilities,
               color=color, width=0.8)
        ax.set_ylim(0, 1)
        if len(entry.states) <= 5:
            ax.set_xticks(range(len(entry.states)))
            ax.set_xticklabels(entry.states, fontsize=7)
        else:
            ax.set_xticks([])
        title = entry.name if len(entry.name) <= 34 else entry.name[:31] + "..."
        ax.set_title(title, fontsize=8)
        ax.tick_params(labelsize=7)
    for j in range(len(entries), nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.suptitle(f"Posterior distributions: {report.system.name}", fontsize=11)
    fig.tight_layout(rect=(0, 0, 1, 0.96))
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(report: AssessmentReport, outdir: Path) -> list[Path]:
    """Write density.png, posteriors.png, and posteriors.csv into `outdir`."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return [
        render_density_figure(report, outdir / "density.png"),
        render_posterior_figure(report, outdir / "posteriors.png"),
        write_posterior_table(report, outdir / "posteriors.csv"),
    ]
