"""Seeded synthetic classification data: Gaussian clusters on hypercube vertices.

Randomness comes from :class:`CounterRNG`, a stateless counter-based
generator whose output is fully specified here so that the same
``(seed, stream, counter)`` reproduces the same numbers anywhere:

* ``mix64(z)``: the SplitMix64 finalizer
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all arithmetic mod 2**64).
* ``key = mix64(seed + stream * 0xD1B54A32D192ED03)``
* ``word(i) = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)``
* ``uniform(i) = (word(i) >> 11) * 2**-53`` in [0, 1)
* ``normal(i) = sqrt(-2 ln(1 - uniform(2i))) * cos(2 pi uniform(2i + 1))``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import H0SepError
from .geometry import PointCloud

_M64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STREAM_MULT = 0xD1B54A32D192ED03
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)

STREAM_CENTERS = 1
STREAM_NOISE = 2
STREAM_SHUFFLE = 3


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _C1
        z = (z ^ (z >> np.uint64(27))) * _C2
    return z ^ (z >> np.uint64(31))


class CounterRNG:
    """Stateless generator: every draw is a pure function of its position."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def _key(self, stream: int) -> np.uint64:
        base = (self.seed + stream * _STREAM_MULT) & _M64
        return mix64(np.array([base], dtype=np.uint64))[0]

    def words(self, stream: int, count: int, offset: int = 0) -> np.ndarray:
        idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            return mix64(self._key(stream) + idx * _GOLDEN)

    def uniform(self, stream: int, count: int, offset: int = 0) -> np.ndarray:
        w = self.words(stream, count, offset)
        return (w >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, stream: int, count: int, offset: int = 0) -> np.ndarray:
        u = self.uniform(stream, 2 * count, 2 * offset)
        r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        return r * np.cos(2.0 * np.pi * u[1::2])

    def permutation(self, stream: int, n: int) -> np.ndarray:
        return np.argsort(self.uniform(stream, n), kind="stable")


@dataclass(frozen=True)
class SynthConfig:
    n_samples: int = 2000
    n_features: int = 40
    n_classes: int = 2
    clusters_per_class: int = 1
    class_sep: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 1 or self.n_classes < 1 or self.clusters_per_class < 1:
            raise H0SepError("n_features, n_classes and clusters_per_class must be >= 1")
        if not self.class_sep > 0:
            raise H0SepError("class_sep must be > 0")
        n_centers = self.n_classes * self.clusters_per_class
        if n_centers > 2**self.n_features:
            raise H0SepError(
                f"{n_centers} cluster centers need more than the "
                f"2^{self.n_features} hypercube vertices"
            )
        if self.n_samples < self.n_classes:
            raise H0SepError("n_samples must be >= n_classes")


def hypercube_centers(cfg: SynthConfig, rng: CounterRNG) -> np.ndarray:
    """Distinct vertices of {-1, +1}^d scaled by class_sep, drawn in order."""
    n_centers = cfg.n_classes * cfg.clusters_per_class
    d = cfg.n_features
    seen = set()
    centers = []
    offset = 0
    while len(centers) < n_centers:
        bits = rng.uniform(STREAM_CENTERS, d, offset) < 0.5
        offset += d
        key = bits.tobytes()
        if key in seen:
            continue
        seen.add(key)
        centers.append(np.where(bits, -1.0, 1.0))
    return np.array(centers) * cfg.class_sep


def make_classification(cfg: SynthConfig) -> PointCloud:
    """Balanced labeled Gaussian clusters.

    Cluster ``c`` sits on the c-th drawn hypercube vertex and belongs to class
    ``c % n_classes``. Class sizes differ by at most one; within a class,
    points are dealt round-robin over its clusters. Each point is its center
    plus standard normal noise, and rows are shuffled at the end.
    """
    rng = CounterRNG(cfg.seed)
    C, K = cfg.n_classes, cfg.clusters_per_class
    centers = hypercube_centers(cfg, rng)

    sizes = [cfg.n_samples // C + (1 if c < cfg.n_samples % C else 0) for c in range(C)]
    labels = np.repeat(np.arange(C), sizes)
    within = np.concatenate([np.arange(s) for s in sizes])
    cluster = labels + C * (within % K)

    noise = rng.normal(STREAM_NOISE, cfg.n_samples * cfg.n_features)
    X = centers[cluster] + noise.reshape(cfg.n_samples, cfg.n_features)
    order = rng.permutation(STREAM_SHUFFLE, cfg.n_samples)
    return PointCloud(X[order], labels[order])
