"""Point clouds, Euclidean distance matrices and diameters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import H0SepError


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PointCloud:
    """N points in R^d with optional integer class labels.

    Coordinates are stored as a read-only float64 array of shape (N, d);
    labels, when present, as a read-only int64 array of length N with values
    in ``{0, ..., C-1}``.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise H0SepError(f"points must be a 2-D array, got shape {pts.shape}")
        if pts.shape[0] > 0 and pts.shape[1] < 1:
            raise H0SepError("points must have dimension d >= 1")
        if not np.all(np.isfinite(pts)):
            raise H0SepError("points contain NaN or infinite coordinates")
        object.__setattr__(self, "points", _readonly(pts))

        if self.labels is not None:
            raw = np.asarray(self.labels)
            if raw.ndim != 1 or raw.shape[0] != pts.shape[0]:
                raise H0SepError(
                    f"expected {pts.shape[0]} labels, got shape {raw.shape}"
                )
            if raw.size and not np.all(np.equal(np.mod(raw, 1), 0)):
                raise H0SepError("labels must be integers")
            lab = raw.astype(np.int64)
            if lab.size and lab.min() < 0:
                raise H0SepError("labels must be nonnegative")
            object.__setattr__(self, "labels", _readonly(lab))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    @property
    def n_classes(self) -> int:
        """C = max label + 1 (0 for unlabeled clouds)."""
        if self.labels is None or self.labels.size == 0:
            return 0
        return int(self.labels.max()) + 1

    def subset(self, index) -> "PointCloud":
        labels = None if self.labels is None else self.labels[index]
        return PointCloud(self.points[index], labels)

    def with_points(self, points) -> "PointCloud":
        """Same labels, new coordinates (e.g. an embedding of this cloud)."""
        return PointCloud(points, self.labels)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric N x N matrix of nonnegative finite distances, zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise H0SepError(f"distance matrix must be square, got {e.shape}")
        if not np.all(np.isfinite(e)) or np.any(e < 0):
            raise H0SepError("distances must be finite and nonnegative")
        if np.any(np.diagonal(e) != 0):
            raise H0SepError("distance matrix diagonal must be zero")
        if not np.array_equal(e, e.T):
            raise H0SepError("distance matrix must be symmetric")
        object.__setattr__(self, "entries", _readonly(e))

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def pairwise_distances(pc) -> DistanceMatrix:
    """Euclidean distances between every pair of points.

    Accepts a PointCloud or an (N, d) array. Each pair is evaluated once as
    ``sqrt(sum((x_i - x_j)**2))`` and mirrored, so the result is exactly
    symmetric.
    """
    if not isinstance(pc, PointCloud):
        pc = PointCloud(pc)
    if pc.n == 0:
        raise H0SepError("empty input")
    if pc.n == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    return DistanceMatrix(squareform(pdist(pc.points, metric="euclidean")))


def diameter(dm: DistanceMatrix) -> float:
    if dm.n < 1:
        raise H0SepError("empty input")
    return float(dm.entries.max())
