import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csitrack.eigen import eigendecompose
from csitrack.subspace import (MSE_SWEEP_DB, find_boundary, fractional_energy, mse_curve,
                               normalized_mi, reconstruction_mse, reconstruction_mse_explicit)

from conftest import planted_covariance, random_psd


def test_mse_hand_values():
    b = eigendecompose(np.diag([4.0, 1.0]))
    assert reconstruction_mse(b, 2) == 0.0
    assert abs(reconstruction_mse(b, 0) - 17 / 4) < 1e-15
    assert abs(reconstruction_mse(b, 1) - 0.25) < 1e-15
    assert abs(reconstruction_mse_explicit(b, 1) - 0.25) < 1e-15
    for bad in (-1, 3, 0.5):
        with pytest.raises(ValueError):
            reconstruction_mse(b, bad)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 9, 30]))
def test_closed_form_matches_explicit_reconstruction(seed, d):
    rng = np.random.default_rng(seed)
    R = random_psd(rng, d)
    b = eigendecompose(R)
    curve = mse_curve(b)
    assert np.all(np.diff(curve) <= 0)
    for i in range(d + 1):
        explicit = reconstruction_mse_explicit(b, i, matrix=R)
        assert abs(explicit - curve[i]) <= 1e-10 * curve[0] + 1e-300


def test_boundary_on_planted_rank_two(rng):
    R, _, _ = planted_covariance(rng, 30, 2, signal=1.0, noise=1e-4)
    p = find_boundary(eigendecompose(R), -12.0)
    assert 1.5 <= p.boundary <= 2.5
    assert not p.saturated


def test_boundary_grid_and_monotonicity(rng):
    assert MSE_SWEEP_DB == tuple(float(x) for x in range(-3, -25, -3))
    b = eigendecompose(np.diag([10.0, 6.0, 3.0, 1.0, 0.2, 0.1]))
    bounds = [find_boundary(b, t).boundary for t in MSE_SWEEP_DB]
    assert np.all(np.diff(bounds) >= 0)
    for t in (-6.0, -12.0):
        p = find_boundary(b, t)
        assert 1.0 <= p.boundary <= 6.0
        norm = p.mse_curve / p.mse_curve[0]
        i = int(np.ceil(p.boundary))
        # the integer index just past the boundary meets the target, the one before does not
        assert norm[i] <= 10 ** (t / 10) + 1e-12
        assert norm[i - 1] > 10 ** (t / 10) or i == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_stricter_targets_never_shrink_boundary(seed):
    rng = np.random.default_rng(seed)
    b = eigendecompose(random_psd(rng, 9, rank=rng.integers(1, 10)))
    targets = sorted(rng.uniform(-60, -0.1, 6), reverse=True)
    bounds = [find_boundary(b, t).boundary for t in targets]
    assert np.all(np.diff(bounds) >= -1e-12)
    assert all(1.0 <= x <= 9.0 for x in bounds)


def test_unreachable_target_saturates():
    b = eigendecompose(np.eye(4))
    p = find_boundary(b, -400.0)
    assert p.boundary == 4.0
    with pytest.raises(ValueError):
        find_boundary(b, 3.0)


def test_fractional_energy_examples():
    assert fractional_energy(eigendecompose(np.eye(4)), 4) == 1.0
    assert abs(fractional_energy(eigendecompose(np.eye(4)), 1) - 0.25) < 1e-15
    eps = 1e-3
    b = eigendecompose(np.diag([10.0, 5.0, eps, eps]))
    assert abs(fractional_energy(b, 2) - 15 / (15 + 2 * eps)) < 1e-12
    assert abs(fractional_energy(b, 2.5) - (15 + eps / 2) / (15 + 2 * eps)) < 1e-12
    with pytest.raises(ValueError):
        fractional_energy(b, 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fractional_energy_non_decreasing(seed):
    rng = np.random.default_rng(seed)
    b = eigendecompose(random_psd(rng, 7))
    grid = np.linspace(1, 7, 25)
    e = [fractional_energy(b, x) for x in grid]
    assert np.all(np.diff(e) >= -1e-15)
    assert abs(e[-1] - 1.0) < 1e-12 and all(0 <= x <= 1 for x in e)


def test_mi_identical_and_independent():
    rng = np.random.default_rng(3)
    a = rng.uniform(size=10000)
    assert abs(normalized_mi(a, a) - 1.0) < 1e-12
    assert normalized_mi(a, rng.uniform(size=10000), bins=16) < 0.05


def test_mi_degenerate_and_errors():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert normalized_mi(np.ones(200), np.ones(200)) == 0.0
        assert any(issubclass(x.category, RuntimeWarning) for x in w)
    with pytest.raises(ValueError):
        normalized_mi(np.arange(50.0), np.arange(50.0))
    with pytest.raises(ValueError):
        normalized_mi(np.arange(200.0), np.arange(201.0))
