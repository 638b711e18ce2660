"""Per-epoch separability tracking and the RunReport JSON document."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import H0SepError, MissingLabelsError
from ..homology import h0_normalized
from ..learners import FitConfig
from ..metrics import calinski_harabasz, normalize_series, roc_auc_n, thornton_index
from ..summaries import (
    StatisticSeries,
    density_distance,
    detect_convergence,
    persistence_density,
    persistence_statistic,
)

REPORT_SCHEMA = 1
SUPERVISED = ("thornton", "roc_auc")
ALL_METRICS = ("p_lt_t", "ch", "thornton", "roc_auc")


@dataclass(frozen=True)
class TrackOptions:
    t: float = 0.6
    bins: int = 50
    delta: float = 0.01
    window: int = 3
    k: int = 5
    ch_k: int = 5
    splits: int = 5
    seed: int = 0
    thornton_rule: str = "per_neighbor"
    fit: FitConfig = field(default_factory=FitConfig)


def choose_metrics(requested, labeled: bool) -> tuple:
    """Resolve the metric set; supervised metrics need labels.

    With nothing requested every metric the data supports is computed.
    """
    if not requested:
        return ALL_METRICS if labeled else ("p_lt_t", "ch")
    missing = [m for m in requested if m in SUPERVISED and not labeled]
    if missing:
        raise MissingLabelsError(f"{', '.join(missing)} requested but no labels available")
    return tuple(m for m in ALL_METRICS if m in requested)


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


def separability_metrics(pc, metrics, opts: TrackOptions):
    """One snapshot's metric values (JSON-ready) and its normalized persistences."""
    values = h0_normalized(pc).values
    out: dict = {"n_bars": int(values.size)}
    if "p_lt_t" in metrics:
        out["p_lt_t"] = persistence_statistic(values, opts.t)
    if "ch" in metrics:
        ch = calinski_harabasz(pc, opts.ch_k, opts.seed)
        out["ch"] = _finite_or_none(ch)
        if math.isinf(ch):
            out["ch_infinite"] = True
    if "thornton" in metrics:
        out["thornton"] = thornton_index(pc, opts.k, opts.thornton_rule)
    if "roc_auc" in metrics:
        rep = roc_auc_n(pc, opts.splits, opts.seed, opts.fit)
        out["roc_auc"] = {"mean": rep.value, "ci_low": rep.ci_low, "ci_high": rep.ci_high}
    return out, values


def _series(records, metric):
    if metric == "roc_auc":
        return [r["roc_auc"]["mean"] for r in records]
    return [r[metric] for r in records]


def build_run_report(clouds, epochs, opts: TrackOptions, requested=(), run_id="run") -> dict:
    """RunReport for a sequence of per-epoch snapshots; see :func:`track_run`."""
    return track_run(clouds, epochs, opts, requested, run_id)[0]


def track_run(clouds, epochs, opts: TrackOptions, requested=(), run_id="run"):
    """Compute the RunReport plus each epoch's normalized persistences.

    Per-epoch metrics are independent; the density distance to the previous
    epoch is filled in afterwards. Every tracked metric is also normalized by
    its maximum over the run, and the convergence epoch is read off the
    ``p_lt_t`` series.
    """
    if len(clouds) != len(epochs):
        raise H0SepError("one snapshot per epoch is required")
    labeled = all(pc.labels is not None for pc in clouds)
    metrics = choose_metrics(requested, labeled)

    records, samples, densities = [], [], []
    for epoch, pc in zip(epochs, clouds):
        rec, values = separability_metrics(pc, metrics, opts)
        records.append({"epoch": int(epoch), **rec})
        samples.append(values)
        densities.append(persistence_density(values, opts.bins).masses.tolist())
    for i, rec in enumerate(records):
        rec["density_distance_to_previous"] = (
            None if i == 0 else density_distance(samples[i - 1], samples[i])
        )

    normalized = {}
    for m in metrics:
        series = _series(records, m)
        if any(v is None for v in series):
            normalized[m] = None
            continue
        try:
            normalized[m] = normalize_series(series).tolist()
        except H0SepError:
            normalized[m] = None

    convergence = None
    if "p_lt_t" in metrics:
        convergence = detect_convergence(
            StatisticSeries(tuple(epochs), tuple(_series(records, "p_lt_t"))),
            opts.delta,
            opts.window,
        )

    edges = persistence_density([0.0], opts.bins).bin_edges.tolist()
    report = {
        "schema": REPORT_SCHEMA,
        "run_id": run_id,
        "seed": opts.seed,
        "parameters": {
            "t": opts.t, "bins": opts.bins, "delta": opts.delta, "window": opts.window,
            "k": opts.k, "ch_k": opts.ch_k, "splits": opts.splits,
            "thornton_rule": opts.thornton_rule,
        },
        "n_points": clouds[0].n,
        "dimension": clouds[0].d,
        "metrics": list(metrics),
        "records": records,
        "normalized": normalized,
        "convergence_epoch": convergence,
        "densities": {"bin_edges": edges, "masses": densities},
    }
    return report, samples
