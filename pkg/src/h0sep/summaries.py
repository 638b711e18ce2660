"""Summaries of normalized H0 persistence times.

``P(persistence < t)`` is the label-free separability statistic; histograms
and 1-Wasserstein distances describe how the whole distribution moves from
one epoch to the next, and :func:`detect_convergence` turns a statistic
series into a stopping signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import H0SepError

DEFAULT_THRESHOLD = 0.6
DEFAULT_BINS = 50


def _values(np_like) -> np.ndarray:
    v = np.asarray(getattr(np_like, "values", np_like), dtype=np.float64).reshape(-1)
    return v


@dataclass(frozen=True, eq=False)
class Density:
    """Equal-width histogram on [0, 1]; ``masses`` sums to 1."""

    bin_edges: np.ndarray
    masses: np.ndarray

    @property
    def bins(self) -> int:
        return self.masses.shape[0]

    def cumulative(self) -> np.ndarray:
        """Mass at or below each right bin edge."""
        return np.cumsum(self.masses)


@dataclass(frozen=True)
class StatisticSeries:
    epochs: tuple
    values: tuple

    def __post_init__(self):
        epochs = tuple(int(e) for e in self.epochs)
        values = tuple(float(v) for v in self.values)
        if len(epochs) != len(values):
            raise H0SepError("epochs and values differ in length")
        if any(b <= a for a, b in zip(epochs, epochs[1:])):
            raise H0SepError("epochs must be strictly increasing")
        object.__setattr__(self, "epochs", epochs)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[float], start: int = 0) -> "StatisticSeries":
        return cls(tuple(range(start, start + len(values))), tuple(values))

    def __len__(self) -> int:
        return len(self.epochs)


def persistence_statistic(np_like, t: float = DEFAULT_THRESHOLD) -> float:
    """Fraction of normalized persistence times strictly below ``t``."""
    if not np.isfinite(t):
        raise H0SepError("threshold must be finite")
    v = _values(np_like)
    if v.size == 0:
        raise H0SepError("no finite bars")
    return float(np.count_nonzero(v < t)) / v.size


def persistence_density(np_like, bins: int = DEFAULT_BINS) -> Density:
    """Normalized equal-width histogram on [0, 1]; the last bin is closed."""
    if bins < 1:
        raise H0SepError("bins must be >= 1")
    v = _values(np_like)
    if v.size == 0:
        raise H0SepError("cannot build a density from an empty sample")
    counts, edges = np.histogram(v, bins=bins, range=(0.0, 1.0))
    if counts.sum() != v.size:
        raise H0SepError("values outside [0, 1]")
    return Density(edges, counts / v.size)


def density_distance(a, b) -> float:
    """1-Wasserstein distance between two empirical distributions.

    Computed as the area between the two empirical CDFs, which are step
    functions with jumps at the pooled sample values.
    """
    u, v = np.sort(_values(a)), np.sort(_values(b))
    if u.size == 0 or v.size == 0:
        raise H0SepError("cannot compare empty samples")
    grid = np.concatenate([u, v])
    grid.sort(kind="mergesort")
    widths = np.diff(grid)
    cdf_u = np.searchsorted(u, grid[:-1], side="right") / u.size
    cdf_v = np.searchsorted(v, grid[:-1], side="right") / v.size
    return float(np.sum(np.abs(cdf_u - cdf_v) * widths))


def detect_convergence(
    series: StatisticSeries, delta: float = 0.01, window: int = 3
) -> Optional[int]:
    """Earliest epoch ending ``window`` consecutive steps that each move < delta.

    A step is ``|value[i] - value[i-1]|``. Returns ``None`` when the series
    never settles (or is shorter than ``window + 1``).
    """
    if not delta > 0:
        raise H0SepError("delta must be positive")
    if window < 1:
        raise H0SepError("window must be >= 1")
    values = np.asarray(series.values, dtype=np.float64)
    if values.size < window + 1:
        return None
    run = 0
    for i, step in enumerate(np.abs(np.diff(values)), start=1):
        run = run + 1 if step < delta else 0
        if run >= window:
            return series.epochs[i]
    return None


def silverman_bandwidth(np_like) -> float:
    v = _values(np_like)
    if v.size < 2:
        return 0.05
    sd = v.std(ddof=1)
    q75, q25 = np.percentile(v, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    if spread <= 0:
        return 0.05
    return 0.9 * spread * v.size ** (-0.2)


def smoothed_density(np_like, grid: np.ndarray, bandwidth: float | None = None) -> np.ndarray:
    """Gaussian-kernel density on ``grid``; used for plots only."""
    v = _values(np_like)
    h = silverman_bandwidth(v) if bandwidth is None else bandwidth
    z = (np.asarray(grid)[:, None] - v[None, :]) / h
    return np.exp(-0.5 * z * z).sum(axis=1) / (v.size * h * np.sqrt(2 * np.pi))
