"""SVG figures for a RunReport, each written next to the CSV it is drawn from."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..summaries import smoothed_density  # noqa: E402

LABELS = {
    "p_lt_t": "P(persistence < t)",
    "ch": "Calinski-Harabasz",
    "thornton": "Thornton",
    "roc_auc": "ROC-AUC-n",
}


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def write_metric_curves(report: dict, out_dir) -> tuple:
    """Normalized metric trajectories: metrics.csv and metrics.svg."""
    out_dir = Path(out_dir)
    epochs = [r["epoch"] for r in report["records"]]
    normalized = report["normalized"]
    names = [m for m in report["metrics"] if normalized.get(m) is not None]

    csv_path = out_dir / "metrics.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", *names])
        for i, e in enumerate(epochs):
            w.writerow([e, *(_fmt(normalized[m][i]) for m in names)])

    fig, ax = plt.subplots(figsize=(7, 4))
    for m in names:
        ax.plot(epochs, normalized[m], marker="o", ms=3, label=LABELS.get(m, m))
    if report.get("convergence_epoch") is not None:
        ax.axvline(report["convergence_epoch"], color="grey", ls="--", lw=1)
    ax.set_xlabel("epoch")
    ax.set_ylabel("normalized value")
    ax.legend(loc="lower right")
    fig.tight_layout()
    svg_path = out_dir / "metrics.svg"
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return csv_path, svg_path


def write_density_evolution(report: dict, samples, out_dir) -> tuple:
    """Histogram masses per epoch (densities.csv) and smoothed curves (densities.svg)."""
    out_dir = Path(out_dir)
    edges = report["densities"]["bin_edges"]
    masses = report["densities"]["masses"]
    epochs = [r["epoch"] for r in report["records"]]

    csv_path = out_dir / "densities.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "bin_low", "bin_high", "mass"])
        for e, row in zip(epochs, masses):
            for b, m in enumerate(row):
                w.writerow([e, _fmt(edges[b]), _fmt(edges[b + 1]), _fmt(m)])

    grid = np.linspace(0.0, 1.0, 201)
    fig, ax = plt.subplots(figsize=(7, 4))
    cmap = plt.get_cmap("viridis")
    for i, (e, values) in enumerate(zip(epochs, samples)):
        color = cmap(i / max(len(epochs) - 1, 1))
        ax.plot(grid, smoothed_density(values, grid), color=color, lw=1)
    sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(epochs[0], epochs[-1]))
    fig.colorbar(sm, ax=ax, label="epoch")
    ax.set_xlabel("normalized persistence")
    ax.set_ylabel("density")
    fig.tight_layout()
    svg_path = out_dir / "densities.svg"
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return csv_path, svg_path
