"""H0 persistence of the Vietoris-Rips filtration.

Two independent engines produce the same diagram:

* :func:`h0_persistence` runs Kruskal's algorithm over the complete distance
  graph. Every edge that joins two components kills the younger one, so the
  finite death times are exactly the minimum-spanning-tree edge lengths.
* :func:`h0_persistence_oracle` builds the 1-skeleton filtration explicitly
  and reduces its Z/2 boundary matrix column by column. It is slow and only
  meant for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import H0SepError
from .geometry import DistanceMatrix, PointCloud, pairwise_distances

ORACLE_MAX_POINTS = 256


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.n_sets = n

    def find(self, x: int) -> int:
        root = x
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets holding a and b; False if they were already one set."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.n_sets -= 1
        return True

    def roots(self) -> np.ndarray:
        """Root of every element, compressing all paths in one vectorized pass."""
        parent = np.asarray(self.parent, dtype=np.int64)
        while True:
            grand = parent[parent]
            if np.array_equal(grand, parent):
                break
            parent = grand
        self.parent = parent.tolist()
        return parent


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Birth/death pairs of H0 features.

    ``finite_bars`` has shape (m, 2). The one component that never dies is
    recorded by ``has_infinite_bar`` rather than by an infinite death value.
    ``merge_edges`` optionally holds the (i, j) point pair whose edge killed
    each finite bar.
    """

    finite_bars: np.ndarray
    has_infinite_bar: bool = True
    merge_edges: Optional[np.ndarray] = None

    def __post_init__(self):
        bars = np.array(self.finite_bars, dtype=np.float64).reshape(-1, 2)
        if not np.all(np.isfinite(bars)):
            raise H0SepError("finite bars must have finite birth and death")
        if np.any(bars[:, 0] < 0) or np.any(bars[:, 0] > bars[:, 1]):
            raise H0SepError("every bar needs 0 <= birth <= death")
        bars.setflags(write=False)
        object.__setattr__(self, "finite_bars", bars)

    @property
    def births(self) -> np.ndarray:
        return self.finite_bars[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.finite_bars[:, 1]

    @property
    def persistences(self) -> np.ndarray:
        return self.finite_bars[:, 1] - self.finite_bars[:, 0]

    def __len__(self) -> int:
        return self.finite_bars.shape[0]


@dataclass(frozen=True, eq=False)
class NormalizedPersistences:
    """Finite persistence times divided by their maximum, all in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def sorted_edges(dm: DistanceMatrix):
    """Upper-triangle edges ordered by (length, min endpoint, max endpoint).

    Returns ``(i, j, length)`` arrays with ``i < j``.
    """
    i, j = np.triu_indices(dm.n, k=1)
    w = dm.entries[i, j]
    order = np.lexsort((j, i, w))
    return i[order], j[order], w[order]


def h0_persistence(dm: DistanceMatrix) -> PersistenceDiagram:
    """H0 diagram via Kruskal's minimum spanning tree.

    Edges are scanned in blocks. Before each block, edges whose endpoints are
    already connected are dropped in one vectorized step; this is exactly the
    rejection the sequential scan would make, so the accepted edges (and their
    order) are identical to plain Kruskal under the same tie-break.
    """
    n = dm.n
    if n < 1:
        raise H0SepError("empty input")
    ei, ej, ew = sorted_edges(dm)
    uf = UnionFind(n)
    deaths: list[float] = []
    pairs: list[tuple[int, int]] = []
    start, block = 0, max(n, 256)
    while uf.n_sets > 1:
        stop = min(start + block, ew.shape[0])
        roots = uf.roots()
        bi, bj = ei[start:stop], ej[start:stop]
        live = np.flatnonzero(roots[bi] != roots[bj]) + start
        for a, b, w in zip(ei[live].tolist(), ej[live].tolist(), ew[live].tolist()):
            if uf.union(a, b):
                deaths.append(w)
                pairs.append((a, b))
                if uf.n_sets == 1:
                    break
        start = stop
        block *= 2

    bars = np.zeros((n - 1, 2))
    bars[:, 1] = deaths
    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return PersistenceDiagram(bars, True, edges)


def z2_boundary(simplex) -> set:
    """Boundary of a simplex over Z/2: the set of its codimension-1 faces.

    Signs vanish mod 2, so the chain is just the face set; vertices have an
    empty boundary.
    """
    simplex = tuple(sorted(simplex))
    if len(simplex) <= 1:
        return set()
    return {simplex[:k] + simplex[k + 1:] for k in range(len(simplex))}


def boundary_of_chain(chain) -> set:
    """Boundary of a Z/2 chain (a set of simplices); shared faces cancel."""
    out: set = set()
    for s in chain:
        out ^= z2_boundary(s)
    return out


def h0_persistence_oracle(
    dm: DistanceMatrix, max_points: int = ORACLE_MAX_POINTS
) -> PersistenceDiagram:
    """H0 diagram by textbook boundary-matrix reduction of the 1-skeleton.

    Filtration order: all vertices at scale 0 (by index), then every edge
    ``{u, v}`` at scale ``d(u, v)``, ties broken by (min, max) endpoint.
    Column ``c`` of the boundary matrix holds the filtration indices of the
    faces of simplex ``c``. Columns are reduced left to right over Z/2; a
    nonzero reduced edge column with lowest row ``r`` pairs vertex ``r``
    (birth 0) with that edge (death = its length). Unpaired vertices are
    essential classes.
    """
    n = dm.n
    if n < 2:
        raise H0SepError("oracle needs at least two points")
    if n > max_points:
        raise H0SepError(f"oracle size limit: {n} points > {max_points}")

    filtration = [((v,), 0.0) for v in range(n)]
    edges = sorted(
        (float(dm.entries[u, v]), u, v) for u, v in combinations(range(n), 2)
    )
    filtration += [((u, v), w) for w, u, v in edges]
    position = {simplex: k for k, (simplex, _) in enumerate(filtration)}

    columns = [{position[f] for f in z2_boundary(s)} for s, _ in filtration]
    pivot_owner: dict[int, int] = {}
    paired_vertices = set()
    bars = []
    merges = []
    for c, col in enumerate(columns):
        while col:
            low = max(col)
            owner = pivot_owner.get(low)
            if owner is None:
                break
            col ^= columns[owner]
        if col:
            low = max(col)
            pivot_owner[low] = c
            simplex, scale = filtration[c]
            if len(simplex) == 2:
                paired_vertices.add(low)
                bars.append((filtration[low][1], scale))
                merges.append(simplex)

    essential = n - len(paired_vertices)
    if essential != 1:
        raise AssertionError(f"complete 1-skeleton must leave one class, got {essential}")
    return PersistenceDiagram(
        np.array(bars).reshape(-1, 2), True, np.array(merges, dtype=np.int64).reshape(-1, 2)
    )


def normalize_diagram(pd: PersistenceDiagram) -> NormalizedPersistences:
    """Finite persistence times scaled to [0, 1] by their maximum.

    The infinite bar is dropped first. If every finite persistence is zero
    (all points coincide) the result is all zeros.
    """
    if len(pd) == 0:
        raise H0SepError("degenerate diagram: no finite bars")
    p = pd.persistences
    top = p.max()
    if top == 0:
        return NormalizedPersistences(np.zeros_like(p))
    return NormalizedPersistences(p / top)


def h0_normalized(points_or_dm) -> NormalizedPersistences:
    """Shortcut: points or distances -> H0 diagram -> normalized persistences."""
    dm = points_or_dm
    if isinstance(points_or_dm, PointCloud):
        dm = pairwise_distances(points_or_dm)
    elif not isinstance(points_or_dm, DistanceMatrix):
        dm = pairwise_distances(PointCloud(points_or_dm))
    return normalize_diagram(h0_persistence(dm))
