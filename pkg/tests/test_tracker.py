import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csitrack import simulator as sim
from csitrack.core import Axis
from csitrack.eigen import EigenBasis, eigendecompose
from csitrack.pipeline import PipelineConfig, run_pipeline
from csitrack.tracker import (FLOOR_DB, TrackerState, UnitaritySample, Variant, magnitude_db, pairwise,
                              rate_of_change, slope, slope_value, track, unitarity)

from conftest import random_psd, random_unitary


def _basis(U, w=None):
    d = U.shape[1]
    w = np.linspace(1.0, 0.1, d) if w is None else w
    return EigenBasis(np.asarray(w, float), np.asarray(U))


def test_static_channel_gives_exact_unity(rng):
    b = eigendecompose(random_psd(rng, 5))
    st_ = TrackerState(components=(0, 1, 4))
    assert pairwise(st_, b, 0.0) == []
    out = pairwise(st_, b, 1.0)
    assert [s.value for s in out] == [1 + 0j] * 3
    assert [s.magnitude_db for s in out] == [0.0] * 3


def test_orthogonal_vectors_hit_the_floor():
    st_ = TrackerState(components=(0,))
    pairwise(st_, _basis(np.eye(3)), 0)
    out = pairwise(st_, _basis(np.eye(3)[:, [1, 0, 2]]), 1)
    assert out[0].value == 0 and out[0].magnitude_db == FLOOR_DB


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_magnitude_bounded_and_phase_invariant(seed, a, b):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, 9)[:, 0]
    v = random_unitary(rng, 9)[:, 0]
    near = u + 1e-9 * v
    near /= np.linalg.norm(near)
    for x, y in ((u, v), (u, near), (u, u)):
        z = unitarity(x, y)
        assert abs(z) <= 1.0 + 1e-9
        z2 = unitarity(x * np.exp(1j * a), y * np.exp(1j * b))
        assert abs(abs(z2) - abs(z)) < 1e-12


def test_first_sample_and_bad_component(rng):
    st_ = TrackerState(components=(7,))
    with pytest.raises(ValueError):
        pairwise(st_, eigendecompose(random_psd(rng, 3)), 0)
    with pytest.raises(ValueError):
        TrackerState(window=1, variant="slope")


def test_timestamps_must_not_go_back(rng):
    st_ = TrackerState()
    b = eigendecompose(random_psd(rng, 3))
    pairwise(st_, b, 1.0)
    with pytest.raises(ValueError):
        pairwise(st_, b, 0.5)


def _rotating(rng, n, step, d=6):
    U0 = random_unitary(rng, d)
    bases = []
    for k in range(n):
        c, s = np.cos(k * step), np.sin(k * step)
        U = U0.copy()
        U[:, 1] = c * U0[:, 1] + s * U0[:, 3]
        U[:, 3] = -s * U0[:, 1] + c * U0[:, 3]
        bases.append(_basis(U))
    return bases


def test_slope_constant_subspace_is_zero_db(rng):
    b = eigendecompose(random_psd(rng, 6))
    out = track([b] * 10, variant="slope", window=5)
    assert len(out) == 6
    assert all(abs(s.value - 1) < 1e-12 and s.magnitude_db == 0.0 for s in out)
    rate = rate_of_change(out)
    np.testing.assert_array_equal(rate, 0.0)


def test_window_two_slope_is_pairwise(rng):
    bases = _rotating(rng, 12, 0.1)
    rng2 = np.random.default_rng(1)
    # arbitrary per-vector phases must not matter
    bases = [_basis(b.eigenvectors * np.exp(1j * rng2.uniform(0, 6.3, 6))) for b in bases]
    pw = track(bases, variant="pairwise")
    sl = track(bases, variant="slope", window=2)
    assert len(pw) == len(sl)
    for a, b in zip(pw, sl):
        assert abs(abs(a.value) - abs(b.value)) < 1e-12


def test_slope_recovers_constant_rotation_rate(rng):
    step = 0.05
    bases = _rotating(rng, 20, step)
    for N in (2, 3, 4, 8):
        # pairs (t, N-1-t) are separated by sep steps and overlap by cos(sep * step)
        seps = np.array([N - 1 - 2 * t for t in range(N // 2)])
        expected = np.exp(np.sum(seps * np.log(np.cos(seps * step))) / np.sum(seps**2))
        out = track(bases, variant="slope", window=N)
        assert len(out) == 20 - N + 1
        for s in out:
            assert abs(abs(s.value) - expected) < 1e-9


def test_slope_buffer_underfull_is_silent(rng):
    st_ = TrackerState(variant=Variant.SLOPE, window=4)
    b = eigendecompose(random_psd(rng, 3))
    assert slope(st_, b, 0) == [] and slope(st_, b, 1) == [] and slope(st_, b, 2) == []
    assert len(slope(st_, b, 3)) == 1
    with pytest.raises(ValueError):
        slope_value([b.eigenvectors[:, 1]])


def test_impulse_event_dips_slope_tracker():
    cfg = sim.plant_event(sim.ChannelSimConfig(seed=11), sim.Event(2.0))
    p = PipelineConfig(estimator="batch", window_len=25, overlap=0.8, variants=("slope",))
    res = run_pipeline(p, (f for f, _ in sim.iter_stream(cfg, 2000)), 500)
    s = res.samples[("dy", "slope", 1)]
    t = np.array([x.timestamp for x in s])
    m = np.array([x.magnitude_db for x in s])
    span = p.slope_window * 5 / 500 + 25 / 500
    event = (t >= 2.0) & (t <= 2.0 + span)
    assert np.median(m[~event]) - m[event].min() >= 6.0
    # the dip is localised: nothing comparable more than two windows away
    far = np.abs(t - 2.0 - span / 2) > 2 * span
    assert m[far].min() > m[event].min() + 3.0
    # and it recovers
    assert np.median(m[t > 3.0]) > -1.0


def test_rate_of_change_examples():
    mk = lambda t, db: UnitaritySample(t, Axis.DY, 1, 10 ** (db / 20), db, Variant.PAIRWISE)
    np.testing.assert_array_equal(rate_of_change([mk(0.0, -1.0), mk(0.5, -1.0)]), [0.0])
    ramp = [mk(0.01 * k, -0.3 * k) for k in range(10)]
    np.testing.assert_allclose(rate_of_change(ramp), -30.0)
    with pytest.raises(ValueError):
        rate_of_change([mk(0.0, 0.0)])
    with pytest.raises(ValueError):
        rate_of_change([mk(1.0, 0.0), mk(1.0, -1.0)])


def test_crossing_flag():
    st_ = TrackerState(components=(1,))
    pairwise(st_, _basis(np.eye(3), [1.0, 0.5, 0.5 - 1e-5]), 0)
    out = pairwise(st_, _basis(np.eye(3), [1.0, 0.5, 0.5 - 1e-5]), 1)
    assert out[0].crossing
    out = pairwise(st_, _basis(np.eye(3), [1.0, 0.5, 0.1]), 2)
    assert not out[0].crossing


def test_magnitude_db_floor():
    assert magnitude_db(0) == FLOOR_DB
    assert magnitude_db(1e-10) == FLOOR_DB
    assert abs(magnitude_db(0.5) - 20 * np.log10(0.5)) < 1e-12
