import functools
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csitrack.classify import (BandError, DtwConfig, LabeledSeries, accuracy, confusion_csv,
                               confusion_matrix, distance_matrix, dtw_distance, format_series,
                               knn_predict, leave_one_out, parse_series, read_corpus, write_corpus)

FULL = DtwConfig(band_radius=1.0, k=1)


def brute_dtw(a, b, r):
    """Textbook recursion over the band; exponential without the cache."""
    n, m = len(a), len(b)

    @functools.lru_cache(maxsize=None)
    def D(i, j):
        if i == 0 and j == 0:
            return 0.0
        if i == 0 or j == 0 or abs(i - j) > r:
            return np.inf
        return abs(a[i - 1] - b[j - 1]) + min(D(i - 1, j - 1), D(i - 1, j), D(i, j - 1))

    return D(n, m)


def test_hand_unrolled_example():
    assert dtw_distance([0, 0, 0], [1, 1, 1], FULL) == 3.0
    assert dtw_distance([1, 2, 3], [1, 2, 3]) == 0.0
    # (0,1,2) vs (0,2): 0-0, 1-2 or 1-0 cost 1, 2-2
    assert dtw_distance([0, 1, 2], [0, 2], FULL) == 1.0


def test_matches_recursive_oracle_on_short_series():
    rng = np.random.default_rng(0)
    for n, m in itertools.product(range(1, 9), repeat=2):
        for radius in (0.25, 0.5, 1.0):
            cfg = DtwConfig(band_radius=radius)
            r = int(np.ceil(radius * max(n, m)))
            a, b = rng.normal(size=n), rng.normal(size=m)
            if abs(n - m) > r:
                with pytest.raises(BandError):
                    dtw_distance(a, b, cfg)
                continue
            assert abs(dtw_distance(a, b, cfg) - brute_dtw(tuple(a), tuple(b), r)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=12),
       st.lists(st.floats(-50, 50), min_size=1, max_size=12))
def test_symmetric_and_zero_on_identity(a, b):
    assert dtw_distance(a, a, FULL) == 0.0
    assert abs(dtw_distance(a, b, FULL) - dtw_distance(b, a, FULL)) < 1e-9
    assert dtw_distance(a, b, FULL) >= 0.0


def test_shifted_copy_beats_pointwise_mismatch():
    t = np.arange(60)
    a = np.exp(-0.5 * ((t - 25) / 3.0) ** 2)
    b = np.roll(a, 4)
    assert dtw_distance(a, b) < np.sum(np.abs(a - b)) / 10


def test_band_too_narrow():
    with pytest.raises(BandError):
        dtw_distance(np.zeros(10), np.zeros(20), DtwConfig(band_radius=0.1))
    with pytest.raises(ValueError):
        dtw_distance([], [1.0])


@pytest.mark.parametrize("kw", [dict(band_radius=0.0), dict(band_radius=1.5), dict(k=2), dict(k=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        DtwConfig(**kw)


def test_series_validation():
    with pytest.raises(ValueError):
        LabeledSeries("a", [])
    with pytest.raises(ValueError):
        LabeledSeries("a", [1.0, np.nan])


def _toy():
    rng = np.random.default_rng(1)
    t = np.linspace(0, 1, 40)
    items = []
    for i in range(5):
        items.append(LabeledSeries("bump", np.exp(-((t - 0.5) / 0.05) ** 2) + 0.05 * rng.normal(size=40)))
        items.append(LabeledSeries("flat", 0.05 * rng.normal(size=40)))
        items.append(LabeledSeries("step", (t > 0.5) + 0.05 * rng.normal(size=40)))
    return items


def test_knn_examples():
    items = _toy()
    assert knn_predict(items[4].series, items, DtwConfig(k=1)) == (items[4].label, 0.0)
    same = [LabeledSeries("only", s.series) for s in items]
    assert knn_predict(items[0], same)[0] == "only"
    with pytest.raises(ValueError):
        knn_predict(items[0], items[:2], DtwConfig(k=3))
    with pytest.raises(ValueError):
        knn_predict(items[0], [])


def test_vote_tie_goes_to_nearer_class():
    train = [LabeledSeries("a", [0.0, 0.0, 5.0]), LabeledSeries("b", [0.0, 0.0, 1.0]),
             LabeledSeries("c", [0.0, 0.0, 9.0])]
    label, score = knn_predict([0.0, 0.0, 0.0], train, DtwConfig(k=3, normalize=False))
    assert label == "b" and score == 1.0


def test_offset_invariance():
    items = _toy()
    shifted = [LabeledSeries(s.label, s.series + 37.5) for s in items]
    q = items[7].series - 12.0
    assert knn_predict(q, items[:7] + items[8:]) == pytest.approx(knn_predict(q, shifted[:7] + shifted[8:]))


def test_leave_one_out_on_separable_toy_set():
    items = _toy()
    D = distance_matrix(items)
    assert np.allclose(D, D.T) and np.all(np.diag(D) == 0)
    preds = leave_one_out(items, distances=D)
    assert preds == leave_one_out(items)
    assert accuracy(preds, [s.label for s in items]) == 1.0


def test_confusion_examples():
    labels, M = confusion_matrix(["a", "b", "c"], ["a", "b", "c"])
    assert labels == ["a", "b", "c"] and np.array_equal(M, np.eye(3))
    rng = np.random.default_rng(2)
    C, n = 4, 4000
    truths = [str(x) for x in rng.integers(0, C, n)]
    preds = [str(x) for x in rng.integers(0, C, n)]
    _, M = confusion_matrix(preds, truths)
    sigma = np.sqrt((1 / C) * (1 - 1 / C) / (n / C))
    assert np.all(np.abs(M - 1 / C) < 3 * sigma * 1.3)
    np.testing.assert_allclose(M.sum(axis=1), 1.0)
    with pytest.raises(ValueError):
        confusion_matrix(["a"], ["a", "b"])
    with pytest.raises(ValueError):
        confusion_matrix(["z"], ["a"], labels=["a"])


def test_confusion_csv_layout():
    text = confusion_csv(["x", "y"], np.array([[1.0, 0.0], [0.25, 0.75]]))
    assert text.splitlines() == ["true\\predicted,x,y", "x,1.000000,0.000000", "y,0.250000,0.750000"]


def test_corpus_round_trip(tmp_path):
    items = _toy()[:4]
    write_corpus(tmp_path, items)
    back = read_corpus(tmp_path)
    assert [b.label for b in back] == [i.label for i in items]
    for a, b in zip(items, back):
        np.testing.assert_array_equal(a.series, b.series)
        assert a.sample_rate == b.sample_rate
    assert parse_series(format_series(items[0])).label == items[0].label
    with pytest.raises(ValueError):
        parse_series("1.0\n2.0\n")
    with pytest.raises(ValueError):
        parse_series("# label=a\nfoo\n")
    with pytest.raises(FileNotFoundError):
        read_corpus(tmp_path / "nope")
    (tmp_path / "empty").mkdir()
    with pytest.raises(ValueError):
        read_corpus(tmp_path / "empty")
