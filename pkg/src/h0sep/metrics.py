"""Baseline separability measures and cross-metric normalization."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import H0SepError, MissingLabelsError
from .geometry import PointCloud, pairwise_distances
from .learners import FitConfig, auc_ovo, kmeans, knn_table, softmax_fit

# Returned by calinski_harabasz when every cluster collapses to a point.
INFINITE_SEPARABILITY = math.inf


@dataclass(frozen=True)
class MetricReport:
    name: str
    value: float
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    epoch: Optional[int] = None
    folds: Optional[tuple] = None

    def __post_init__(self):
        if (self.ci_low is None) != (self.ci_high is None):
            raise H0SepError("confidence interval needs both ends")
        if self.ci_low is not None and not self.ci_low <= self.value <= self.ci_high:
            raise H0SepError("value must lie inside its confidence interval")

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None}
        if "folds" in out:
            out["folds"] = list(out["folds"])
        if math.isinf(self.value):
            out["value"] = None
            out["infinite"] = True
        return out


def _labels(pc: PointCloud) -> np.ndarray:
    if pc.labels is None:
        raise MissingLabelsError("labels are required for this metric")
    return pc.labels


def thornton_index(pc: PointCloud, k: int = 5, rule: str = "per_neighbor") -> float:
    """Label agreement between each point and its k nearest neighbours.

    ``rule="per_neighbor"`` averages the agreement indicator over all N*k
    (point, neighbour) pairs. ``rule="all_agree"`` instead counts the fraction
    of points whose k neighbours all share their label.
    """
    y = _labels(pc)
    nbrs = knn_table(pairwise_distances(pc), k)
    agree = y[nbrs] == y[:, None]
    if rule == "per_neighbor":
        return float(agree.sum()) / (pc.n * k)
    if rule == "all_agree":
        return float(np.count_nonzero(agree.all(axis=1))) / pc.n
    raise H0SepError(f"unknown Thornton rule {rule!r}")


def calinski_harabasz(pc, k: int = 5, seed: int = 0) -> float:
    """Calinski-Harabasz index of a k-means partition (labels are ignored).

    ``(SS_B / (k - 1)) / (SS_W / (N - k))``; returns ``INFINITE_SEPARABILITY``
    when the within-cluster scatter is zero.
    """
    X = pc.points if isinstance(pc, PointCloud) else np.asarray(pc, dtype=np.float64)
    n = X.shape[0]
    if k < 2:
        raise H0SepError("Calinski-Harabasz needs k >= 2")
    if n <= k:
        raise H0SepError(f"Calinski-Harabasz needs N > k, got N={n}, k={k}")
    assign = kmeans(X, k, seed).assignments
    counts = np.bincount(assign, minlength=k)
    centroids = np.zeros((k, X.shape[1]))
    np.add.at(centroids, assign, X)
    centroids /= counts[:, None]
    grand = X.mean(axis=0)
    ss_b = float(np.sum(counts * ((centroids - grand) ** 2).sum(axis=1)))
    ss_w = float(((X - centroids[assign]) ** 2).sum())
    if ss_w == 0:
        return INFINITE_SEPARABILITY
    return (ss_b / (k - 1)) / (ss_w / (n - k))


def stratified_folds(labels: np.ndarray, n_splits: int, seed: int) -> np.ndarray:
    """Fold id per point: each class is shuffled, then dealt round-robin."""
    rng = np.random.default_rng(seed)
    fold = np.empty(labels.shape[0], dtype=np.int64)
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < n_splits:
            raise H0SepError(
                f"cannot stratify: class {int(c)} has {members.size} < {n_splits} members"
            )
        fold[rng.permutation(members)] = np.arange(members.size) % n_splits
    return fold


def t_interval(values: Sequence[float], level: float = 0.95):
    """Student-t confidence interval for the mean of ``values``."""
    v = np.asarray(values, dtype=np.float64)
    mean = float(v.mean())
    if v.size < 2:
        return mean, mean, mean
    half = float(stats.t.ppf(0.5 + level / 2, df=v.size - 1) * v.std(ddof=1) / math.sqrt(v.size))
    return mean, mean - half, mean + half


def roc_auc_n(
    pc: PointCloud,
    n: int = 5,
    seed: int = 0,
    fit_config: FitConfig | None = None,
) -> MetricReport:
    """Cross-validated softmax-regression AUC over ``n`` stratified folds.

    Each fold is scored on its held-out points (binary AUC for two classes,
    one-vs-one otherwise). Reports the fold mean with a 95% Student-t CI,
    clipped to [0, 1] since AUC cannot leave that range.
    """
    y = _labels(pc)
    if n < 2:
        raise H0SepError("need at least two splits")
    cfg = fit_config or FitConfig()
    folds = stratified_folds(y, n, seed)
    C = pc.n_classes
    scores = []
    for f in range(n):
        train, test = folds != f, folds == f
        model = softmax_fit(
            pc.subset(train), cfg.lr, cfg.epochs, seed + f, cfg.batch_size, n_classes=C
        )
        scores.append(auc_ovo(model.predict_proba(pc.points[test]), y[test]))
    mean, lo, hi = t_interval(scores)
    return MetricReport(f"roc_auc_{n}", mean, max(lo, 0.0), min(hi, 1.0), folds=tuple(scores))


def normalize_series(values: Sequence[float]) -> np.ndarray:
    """Divide a metric trajectory by its maximum so the peak is exactly 1."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise H0SepError("cannot normalize: series must be finite and nonempty")
    if np.any(v < 0):
        raise H0SepError("cannot normalize: negative values")
    top = v.max()
    if top <= 0:
        raise H0SepError("cannot normalize: all values are zero")
    return v / top
