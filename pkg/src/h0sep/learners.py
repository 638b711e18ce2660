"""Small from-scratch learners used by the baseline separability metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from .errors import H0SepError, MissingLabelsError
from .geometry import DistanceMatrix, PointCloud

KMEANS_MAX_ITER = 300


def _as_points(data) -> np.ndarray:
    if isinstance(data, PointCloud):
        return data.points
    return np.asarray(data, dtype=np.float64)


# --------------------------------------------------------------------------
# k-means

@dataclass(frozen=True, eq=False)
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int = 0
    inertia_history: tuple = ()

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            cum = np.cumsum(d2)
            idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
            idx = min(idx, n - 1)
            while d2[idx] == 0:  # only reachable through round-off at the top end
                idx -= 1
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            idx = int(rest[rng.integers(rest.size)])
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _fill_empty(X, assign, d2, k):
    """Give each empty cluster the point farthest from its current centroid."""
    counts = np.bincount(assign, minlength=k)
    if counts.min() > 0:
        return assign
    assign = assign.copy()
    cost = d2[np.arange(X.shape[0]), assign].copy()
    for j in np.flatnonzero(counts == 0):
        movable = counts[assign] > 1
        candidates = np.where(movable, cost, -1.0)
        p = int(np.argmax(candidates))
        counts[assign[p]] -= 1
        assign[p] = j
        counts[j] = 1
        cost[p] = 0.0
    return assign


def _centroids(X, assign, k):
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, assign, X)
    return sums / np.bincount(assign, minlength=k)[:, None]


def _inertia(X, assign, centroids) -> float:
    diff = X - centroids[assign]
    return float(np.einsum("nd,nd->", diff, diff))


def kmeans(data, k: int, seed: int = 0, max_iter: int = KMEANS_MAX_ITER) -> KMeansResult:
    """Lloyd's algorithm from k-means++ seeding.

    Stops at an assignment fixpoint or after ``max_iter`` iterations. Ties in
    the assignment step go to the lowest cluster id.
    """
    X = _as_points(data)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise H0SepError(f"k must satisfy 1 <= k <= N, got k={k}, N={n}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(X, k, rng)
    assign = None
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _sq_dists(X, centroids)
        new = _fill_empty(X, np.argmin(d2, axis=1), d2, k)
        if assign is not None and np.array_equal(new, assign):
            n_iter -= 1
            break
        assign = new
        centroids = _centroids(X, assign, k)
        history.append(_inertia(X, assign, centroids))
    return KMeansResult(assign, centroids, history[-1], n_iter, tuple(history))


# --------------------------------------------------------------------------
# nearest neighbours

def knn_indices(dm: DistanceMatrix, i: int, k: int) -> np.ndarray:
    """The k nearest points to ``i`` (itself excluded), ties to the lower index."""
    n = dm.n
    if not 0 <= i < n:
        raise H0SepError(f"index {i} out of range for {n} points")
    if not 1 <= k <= n - 1:
        raise H0SepError(f"k must satisfy 1 <= k <= N-1, got k={k}, N={n}")
    others = np.delete(np.arange(n), i)
    order = np.argsort(dm.entries[i, others], kind="stable")
    return others[order[:k]]


def knn_table(dm: DistanceMatrix, k: int) -> np.ndarray:
    """Row i holds ``knn_indices(dm, i, k)``; computed for all points at once."""
    n = dm.n
    if not 1 <= k <= n - 1:
        raise H0SepError(f"k must satisfy 1 <= k <= N-1, got k={k}, N={n}")
    d = dm.entries.copy()
    np.fill_diagonal(d, np.inf)
    return np.argsort(d, axis=1, kind="stable")[:, :k]


# --------------------------------------------------------------------------
# softmax regression

def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], n_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def softmax_loss_and_grad(weights, bias, X, Y):
    """Mean cross-entropy of a linear softmax model and its gradient.

    ``X`` is (n, d), ``Y`` one-hot (n, C), ``weights`` (C, d), ``bias`` (C,).
    Returns ``(loss, grad_weights, grad_bias)``.
    """
    z = X @ weights.T + bias
    logp = log_softmax(z)
    n = X.shape[0]
    loss = -float(np.sum(Y * logp)) / n
    g = (np.exp(logp) - Y) / n
    return loss, g.T @ X, g.sum(axis=0)


@dataclass(frozen=True, eq=False)
class FitConfig:
    lr: float = 0.1
    epochs: int = 200
    batch_size: Optional[int] = None


@dataclass(eq=False)
class SoftmaxModel:
    weights: np.ndarray
    bias: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    losses: list = field(default_factory=list)

    @property
    def classes(self) -> int:
        return self.weights.shape[0]

    def standardize(self, X) -> np.ndarray:
        return (_as_points(X) - self.mean) / self.scale

    def decision(self, X) -> np.ndarray:
        return self.standardize(X) @ self.weights.T + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision(X))


def _require_labels(pc: PointCloud) -> np.ndarray:
    if not isinstance(pc, PointCloud) or pc.labels is None:
        raise MissingLabelsError("labels are required")
    return pc.labels


def softmax_fit(
    pc: PointCloud,
    lr: float = 0.1,
    epochs: int = 200,
    seed: int = 0,
    batch_size: Optional[int] = None,
    n_classes: Optional[int] = None,
) -> SoftmaxModel:
    """Multinomial logistic regression by gradient descent from zero weights.

    Features are standardized with statistics of ``pc`` alone. Full-batch by
    default; ``batch_size`` switches to seeded shuffled minibatches.
    """
    y = _require_labels(pc)
    if np.unique(y).size < 2:
        raise H0SepError("degenerate labels: need at least two classes")
    C = max(pc.n_classes, n_classes or 0)
    mean = pc.points.mean(axis=0)
    scale = pc.points.std(axis=0)
    scale[scale == 0] = 1.0
    X = (pc.points - mean) / scale
    Y = one_hot(y, C)
    W = np.zeros((C, pc.d))
    b = np.zeros(C)
    rng = np.random.default_rng(seed)
    losses = []
    for _ in range(epochs):
        if batch_size is None or batch_size >= X.shape[0]:
            loss, gW, gb = softmax_loss_and_grad(W, b, X, Y)
            losses.append(loss)
            W -= lr * gW
            b -= lr * gb
        else:
            order = rng.permutation(X.shape[0])
            for s in range(0, X.shape[0], batch_size):
                idx = order[s:s + batch_size]
                _, gW, gb = softmax_loss_and_grad(W, b, X[idx], Y[idx])
                W -= lr * gW
                b -= lr * gb
            losses.append(softmax_loss_and_grad(W, b, X, Y)[0])
    losses.append(softmax_loss_and_grad(W, b, X, Y)[0])
    return SoftmaxModel(W, b, mean, scale, losses)


# --------------------------------------------------------------------------
# ROC-AUC

def auc_binary(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) with ties worth one half."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.shape != y.shape:
        raise H0SepError("scores and labels differ in length")
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = int((y == 0).sum())
    if n_pos + n_neg != y.size:
        raise H0SepError("labels must be binary 0/1")
    if n_pos == 0 or n_neg == 0:
        raise H0SepError("both classes must be present")
    ranks = rankdata(s, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def auc_ovo(probabilities, labels) -> float:
    """One-vs-one multi-class AUC (Hand and Till).

    Mean over unordered class pairs (i, j) of ``(A(i|j) + A(j|i)) / 2`` where
    ``A(i|j)`` is the binary AUC on the points of classes i and j scored by
    the probability of class i. For two classes this is the binary AUC of
    the class-1 column.
    """
    P = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels).reshape(-1)
    if P.ndim != 2 or P.shape[0] != y.shape[0]:
        raise H0SepError("probabilities must be (N, C) with N labels")
    C = P.shape[1]
    if C < 2:
        raise H0SepError("need at least two classes")
    missing = [c for c in range(C) if not np.any(y == c)]
    if missing:
        raise H0SepError(f"classes missing from labels: {missing}")
    if C == 2:
        return auc_binary(P[:, 1], (y == 1).astype(int))
    pair_scores = []
    for i, j in combinations(range(C), 2):
        mask = (y == i) | (y == j)
        yi = (y[mask] == i).astype(int)
        a_ij = auc_binary(P[mask, i], yi)
        a_ji = auc_binary(P[mask, j], 1 - yi)
        pair_scores.append(0.5 * (a_ij + a_ji))
    return float(np.mean(pair_scores))

