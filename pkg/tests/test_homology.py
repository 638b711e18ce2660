import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from h0sep import (
    H0SepError,
    PointCloud,
    h0_normalized,
    h0_persistence,
    h0_persistence_oracle,
    normalize_diagram,
    pairwise_distances,
)
from h0sep.homology import UnionFind, boundary_of_chain, z2_boundary

clouds = arrays(
    np.float64,
    st.tuples(st.integers(2, 20), st.integers(1, 6)),
    elements=st.floats(-100, 100, allow_subnormal=False),
)


def deaths(pd):
    return np.sort(pd.deaths)


def dm_of(points):
    return pairwise_distances(PointCloud(np.asarray(points, dtype=float)))


def test_two_points():
    for engine in (h0_persistence, h0_persistence_oracle):
        pd = engine(dm_of([[0.0, 0.0], [3.0, 4.0]]))
        np.testing.assert_array_equal(pd.finite_bars, [[0.0, 5.0]])
        assert pd.has_infinite_bar


def test_path_on_a_line():
    for engine in (h0_persistence, h0_persistence_oracle):
        assert deaths(engine(dm_of([[0.0], [1.0], [3.0]]))).tolist() == [1.0, 2.0]


def test_unit_square_skips_diagonal():
    square = [[0, 0], [1, 0], [0, 1], [1, 1]]
    for engine in (h0_persistence, h0_persistence_oracle):
        assert deaths(engine(dm_of(square))).tolist() == [1.0, 1.0, 1.0]


def test_equilateral_triangle():
    tri = [[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]]
    dm = dm_of(tri)
    for engine in (h0_persistence, h0_persistence_oracle):
        np.testing.assert_allclose(deaths(engine(dm)), [1.0, 1.0], rtol=1e-15)


def test_single_point_has_no_finite_bars():
    pd = h0_persistence(dm_of([[1.0, 2.0]]))
    assert len(pd) == 0 and pd.has_infinite_bar
    with pytest.raises(H0SepError, match="degenerate diagram"):
        normalize_diagram(pd)


def test_oracle_limits():
    with pytest.raises(H0SepError, match="oracle size limit"):
        h0_persistence_oracle(dm_of(np.zeros((300, 1))))
    with pytest.raises(H0SepError):
        h0_persistence_oracle(dm_of([[0.0]]))


def test_random_ten_point_cross_engine(rng):
    dm = dm_of(rng.normal(size=(10, 3)))
    np.testing.assert_array_equal(deaths(h0_persistence(dm)), deaths(h0_persistence_oracle(dm)))


def test_ties_and_duplicates_cross_engine(rng):
    pts = rng.integers(0, 3, size=(25, 2)).astype(float)
    dm = dm_of(pts)
    np.testing.assert_array_equal(deaths(h0_persistence(dm)), deaths(h0_persistence_oracle(dm)))


def test_deaths_match_scipy_mst(rng):
    from scipy.sparse.csgraph import minimum_spanning_tree

    pts = rng.normal(size=(300, 4))
    dm = dm_of(pts)
    mst = minimum_spanning_tree(dm.entries).toarray()
    np.testing.assert_allclose(deaths(h0_persistence(dm)), np.sort(mst[mst > 0]), rtol=1e-15)


def test_large_cloud_spans_several_blocks(rng):
    # more edges than the first scan block, so later blocks are exercised
    from scipy.sparse.csgraph import minimum_spanning_tree

    pts = np.vstack([rng.normal(size=(400, 2)), rng.normal(size=(400, 2)) + 50.0])
    dm = dm_of(pts)
    mst = minimum_spanning_tree(dm.entries).toarray()
    got = deaths(h0_persistence(dm))
    assert got.size == 799
    np.testing.assert_allclose(got, np.sort(mst[mst > 0]), rtol=1e-15)


def test_merge_edges_form_spanning_tree(rng):
    pts = rng.normal(size=(40, 3))
    pd = h0_persistence(dm_of(pts))
    uf = UnionFind(40)
    for i, j in pd.merge_edges:
        assert uf.union(int(i), int(j))
    assert uf.n_sets == 1


def test_normalization_examples():
    from h0sep.homology import PersistenceDiagram

    pd = PersistenceDiagram(np.array([[0, 1.0], [0, 2.0], [0, 4.0]]))
    np.testing.assert_array_equal(normalize_diagram(pd).values, [0.25, 0.5, 1.0])
    assert h0_normalized(np.zeros((5, 3))).values.tolist() == [0.0] * 4
    assert h0_normalized(np.array([[0.0], [7.0]])).values.tolist() == [1.0]


def test_h0_normalized_accepts_all_inputs():
    pts = np.array([[0.0], [1.0], [3.0]])
    a = h0_normalized(pts).values
    b = h0_normalized(PointCloud(pts)).values
    c = h0_normalized(dm_of(pts)).values
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, c)
    np.testing.assert_array_equal(np.sort(a), [0.5, 1.0])


def test_z2_boundary_of_boundary_is_zero():
    for k in range(1, 5):
        simplex = tuple(range(k + 1))
        assert boundary_of_chain(z2_boundary(simplex)) == set()
    assert z2_boundary((0, 1)) == {(0,), (1,)}


def test_union_find_basic():
    uf = UnionFind(5)
    assert uf.union(0, 1) and uf.union(3, 4)
    assert not uf.union(1, 0)
    assert uf.n_sets == 3
    assert uf.find(0) == uf.find(1) != uf.find(3)
    roots = uf.roots()
    assert roots[3] == roots[4] and len(set(roots.tolist())) == 3


@given(clouds)
def test_engines_agree(x):
    dm = dm_of(x)
    np.testing.assert_allclose(
        deaths(h0_persistence(dm)), deaths(h0_persistence_oracle(dm)), rtol=0, atol=1e-9
    )


@given(clouds)
def test_structural_invariants(x):
    pd = h0_persistence(dm_of(x))
    n = x.shape[0]
    assert len(pd) == n - 1
    assert np.all(pd.births == 0)
    assert np.all(pd.deaths >= 0)
    v = normalize_diagram(pd).values
    assert np.all((v >= 0) & (v <= 1))
    if v.size and pd.deaths.max() > 0:
        assert v.max() == 1.0


@given(clouds, st.sampled_from([0.01, 1.0, 100.0]))
def test_scale_invariance(x, c):
    a = np.sort(h0_normalized(x).values)
    b = np.sort(h0_normalized(x * c).values)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


@given(clouds)
def test_invariant_under_permutation_and_translation(x):
    perm = np.random.default_rng(0).permutation(x.shape[0])
    a = deaths(h0_persistence(dm_of(x)))
    b = deaths(h0_persistence(dm_of(x[perm] + 3.0)))
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


def test_mst_is_minimal_over_all_spanning_trees():
    # exhaustive check on a tiny cloud: no spanning tree is lighter
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(5, 2))
    dm = dm_of(pts).entries
    edges = list(itertools.combinations(range(5), 2))
    best = np.inf
    for tree in itertools.combinations(edges, 4):
        uf = UnionFind(5)
        if all(uf.union(i, j) for i, j in tree):
            best = min(best, sum(dm[i, j] for i, j in tree))
    assert h0_persistence(dm_of(pts)).deaths.sum() == pytest.approx(best, rel=1e-12)
