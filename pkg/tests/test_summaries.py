import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import trapezoid
from scipy.stats import wasserstein_distance

from h0sep import (
    H0SepError,
    StatisticSeries,
    density_distance,
    detect_convergence,
    persistence_density,
    persistence_statistic,
)
from h0sep.homology import NormalizedPersistences
from h0sep.summaries import silverman_bandwidth, smoothed_density

unit_values = arrays(np.float64, st.integers(1, 60), elements=st.floats(0, 1))


def test_statistic_examples():
    v = [0.25, 0.5, 1.0]
    assert persistence_statistic(v, 0.6) == pytest.approx(2 / 3, abs=0)
    assert persistence_statistic(v, 0.0) == 0.0
    assert persistence_statistic(v, 1.0001) == 1.0
    assert persistence_statistic(NormalizedPersistences(np.array(v)), 0.6) == 2 / 3


def test_statistic_threshold_is_strict():
    assert persistence_statistic([0.6, 0.6], 0.6) == 0.0


def test_statistic_empty():
    with pytest.raises(H0SepError, match="no finite bars"):
        persistence_statistic([], 0.6)


def test_density_examples():
    np.testing.assert_array_equal(persistence_density([0, 0, 0], 2).masses, [1, 0])
    np.testing.assert_array_equal(persistence_density([0.25, 0.75], 2).masses, [0.5, 0.5])
    # the last bin is closed on the right
    np.testing.assert_array_equal(persistence_density([1.0], 4).masses, [0, 0, 0, 1])
    d = persistence_density([0.1], 5)
    np.testing.assert_allclose(d.bin_edges, np.linspace(0, 1, 6))


def test_density_law_of_large_numbers():
    v = np.random.default_rng(0).uniform(size=10_000)
    m = persistence_density(v, 10).masses
    assert np.all(np.abs(m - 0.1) < 0.02)


def test_density_errors():
    with pytest.raises(H0SepError):
        persistence_density([], 10)
    with pytest.raises(H0SepError):
        persistence_density([0.5, 1.5], 10)


def test_distance_examples():
    assert density_distance([0, 0, 0], [1, 1, 1]) == 1.0
    x = np.random.default_rng(1).uniform(size=50)
    assert density_distance(x, x) == 0.0
    assert density_distance([0, 1], [0.5, 0.5]) == pytest.approx(0.5, abs=1e-15)


def test_distance_empty():
    with pytest.raises(H0SepError):
        density_distance([], [0.5])


@given(unit_values, unit_values)
def test_distance_matches_scipy(a, b):
    assert density_distance(a, b) == pytest.approx(wasserstein_distance(a, b), abs=1e-12)


@given(unit_values, unit_values)
def test_distance_is_symmetric_and_bounded(a, b):
    d = density_distance(a, b)
    assert d == density_distance(b, a)
    assert 0.0 <= d <= 1.0


@given(unit_values, st.floats(0, 1))
def test_statistic_is_a_fraction(v, t):
    p = persistence_statistic(v, t)
    assert 0.0 <= p <= 1.0
    assert p * v.size == pytest.approx(np.sum(v < t))


@given(unit_values, st.integers(1, 40))
def test_density_sums_to_one(v, bins):
    d = persistence_density(v, bins)
    assert d.masses.sum() == pytest.approx(1.0)
    assert d.cumulative()[-1] == pytest.approx(1.0)


def converge_oracle(values, delta, window):
    # straight transcription: first i such that the window steps ending at i are all small
    for i in range(window, len(values)):
        if all(abs(values[j] - values[j - 1]) < delta for j in range(i - window + 1, i + 1)):
            return i
    return None


def test_convergence_examples():
    s = StatisticSeries.from_values([0.4] * 8)
    assert detect_convergence(s, 0.01, 3) == 3
    rising = StatisticSeries.from_values([0.1 * i for i in range(10)])
    assert detect_convergence(rising, 0.01, 3) is None
    hand = StatisticSeries.from_values([0.1, 0.3, 0.58, 0.60, 0.605, 0.606])
    assert detect_convergence(hand, 0.01, 2) == 5


def test_convergence_short_series_is_absent():
    assert detect_convergence(StatisticSeries.from_values([0.5, 0.5, 0.5]), 0.01, 3) is None


def test_convergence_reports_epoch_labels():
    s = StatisticSeries((10, 20, 30, 40), (0.5, 0.5, 0.5, 0.5))
    assert detect_convergence(s, 0.01, 3) == 40


def test_series_epochs_must_increase():
    with pytest.raises(H0SepError):
        StatisticSeries((0, 2, 1), (0.1, 0.2, 0.3))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(1e-4, 0.5),
       st.integers(1, 5))
def test_convergence_matches_oracle(values, delta, window):
    got = detect_convergence(StatisticSeries.from_values(values), delta, window)
    assert got == converge_oracle(values, delta, window)


def test_smoothed_density_integrates_near_one():
    v = np.random.default_rng(2).beta(2, 5, size=500)
    grid = np.linspace(-1, 2, 3001)
    f = smoothed_density(v, grid)
    assert trapezoid(f, grid) == pytest.approx(1.0, abs=1e-3)
    assert silverman_bandwidth(v) > 0
