import math

import numpy as np
import pytest

from h0sep import (
    H0SepError,
    MetricReport,
    MissingLabelsError,
    PointCloud,
    SynthConfig,
    calinski_harabasz,
    make_classification,
    normalize_series,
    roc_auc_n,
    thornton_index,
)
from h0sep.metrics import INFINITE_SEPARABILITY, stratified_folds, t_interval


def thornton_brute(points, labels, k):
    n = len(points)
    hits = 0
    for i in range(n):
        dist = []
        for j in range(n):
            if j != i:
                dist.append((math.dist(points[i], points[j]), j))
        dist.sort()
        hits += sum(labels[j] == labels[i] for _, j in dist[:k])
    return hits / (n * k)


def test_thornton_examples():
    pc = PointCloud(np.random.default_rng(0).normal(size=(10, 2)), np.zeros(10, int))
    assert thornton_index(pc) == 1.0
    alt = PointCloud(np.arange(4.0)[:, None], [0, 1, 0, 1])
    assert thornton_index(alt, k=1) == 0.0


def test_thornton_two_blobs_brute():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(size=(15, 3)), rng.normal(size=(15, 3)) + 40])
    y = np.zeros(30, int)
    pc = PointCloud(X, y)
    assert thornton_index(pc, 5) == thornton_brute(X.tolist(), y.tolist(), 5) == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_thornton_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, 40))
    X = rng.normal(size=(n, int(rng.integers(1, 5))))
    y = rng.integers(0, 3, size=n)
    k = int(rng.integers(1, 6))
    assert thornton_index(PointCloud(X, y), k) == thornton_brute(X.tolist(), y.tolist(), k)


def test_thornton_all_agree_rule():
    X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
    pc = PointCloud(X, [0, 0, 1, 1, 1])
    # only points 3 and 4 have two same-label neighbours
    per = thornton_index(pc, 2)
    allg = thornton_index(pc, 2, rule="all_agree")
    assert per == thornton_brute(X.tolist(), [0, 0, 1, 1, 1], 2)
    assert allg == 0.4
    with pytest.raises(H0SepError):
        thornton_index(pc, 2, rule="majority")


def test_thornton_needs_labels():
    with pytest.raises(MissingLabelsError):
        thornton_index(PointCloud(np.zeros((5, 1))))


def test_ch_hand_computed():
    X = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
    assert calinski_harabasz(X, k=2) == pytest.approx(200.0, abs=1e-9)


def test_ch_identical_points_is_infinite():
    assert calinski_harabasz(np.ones((6, 2)), k=2) == INFINITE_SEPARABILITY


def test_ch_blob_vs_five_blobs():
    rng = np.random.default_rng(0)
    blob = rng.normal(size=(250, 2))
    centers = np.array([[0, 0], [30, 0], [0, 30], [30, 30], [15, 60]])
    five = np.vstack([rng.normal(size=(50, 2)) + c for c in centers])
    assert calinski_harabasz(blob, 5, seed=0) < calinski_harabasz(five, 5, seed=0)


def test_ch_errors():
    with pytest.raises(H0SepError):
        calinski_harabasz(np.zeros((5, 2)), k=5)


def test_stratified_folds_balanced():
    y = np.repeat([0, 1, 2], [10, 12, 7])
    f = stratified_folds(y, 5, 0)
    for c in range(3):
        counts = np.bincount(f[y == c], minlength=5)
        assert counts.max() - counts.min() <= 1
    with pytest.raises(H0SepError, match="cannot stratify"):
        stratified_folds(np.array([0] * 10 + [1] * 3), 5, 0)


def test_t_interval():
    from scipy import stats

    v = [0.7, 0.8, 0.75, 0.9, 0.85]
    m, lo, hi = t_interval(v)
    ref = stats.t.interval(0.95, 4, loc=np.mean(v), scale=stats.sem(v))
    assert (lo, hi) == pytest.approx(ref, abs=1e-12)
    assert m == pytest.approx(0.8)


def test_roc_auc_n_separable():
    pc = make_classification(SynthConfig(400, 5, 2, 1, 1000.0, seed=1))
    r = roc_auc_n(pc, 5)
    assert r.value == 1.0 and r.ci_low == 1.0 and r.ci_high == 1.0
    assert r.name == "roc_auc_5" and len(r.folds) == 5


def test_roc_auc_n_null():
    rng = np.random.default_rng(0)
    pc = PointCloud(rng.normal(size=(2000, 5)), rng.permutation(np.arange(2000) % 2))
    assert abs(roc_auc_n(pc, 5).value - 0.5) < 0.06


def test_roc_auc_n_split_stability():
    pc = make_classification(SynthConfig(600, 10, 2, 2, 0.7, seed=2))
    assert abs(roc_auc_n(pc, 2).value - roc_auc_n(pc, 5).value) < 0.05


def test_roc_auc_n_multiclass_and_ci():
    pc = make_classification(SynthConfig(300, 6, 3, 1, 1.0, seed=3))
    r = roc_auc_n(pc, 5)
    assert r.ci_low <= r.value <= r.ci_high
    assert 0.5 < r.value <= 1.0
    assert set(r.to_dict()) >= {"name", "value", "ci_low", "ci_high"}


def test_roc_auc_n_errors():
    with pytest.raises(H0SepError, match="cannot stratify"):
        roc_auc_n(PointCloud(np.zeros((8, 1)) + np.arange(8)[:, None], [0] * 6 + [1] * 2), 5)


def test_metric_report_validation():
    with pytest.raises(H0SepError):
        MetricReport("x", 0.5, 0.6, 0.7)


def test_normalize_series():
    np.testing.assert_array_equal(normalize_series([50, 100, 200]), [0.25, 0.5, 1.0])
    np.testing.assert_array_equal(normalize_series([3.3] * 4), [1.0] * 4)
    v = np.random.default_rng(0).uniform(0.01, 7, size=20)
    assert normalize_series(v).max() == 1.0
    with pytest.raises(H0SepError, match="cannot normalize"):
        normalize_series([0, 0])
