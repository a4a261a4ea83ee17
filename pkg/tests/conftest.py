import numpy as np
import pytest


def random_unitary(rng, d):
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_psd(rng, d, rank=None):
    rank = d if rank is None else rank
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    R = X @ X.conj().T
    return 0.5 * (R + R.conj().T)


def planted_covariance(rng, d, rank, signal=1.0, noise=1e-4):
    """``Q diag(signal.., noise..) Q^H`` with a random unitary ``Q``."""
    Q = random_unitary(rng, d)
    lam = np.full(d, noise)
    lam[:rank] = signal
    return (Q * lam) @ Q.conj().T, Q, lam


def complex_frames(rng, n, shape=(3, 3, 30), t0=0.0, rate=500.0):
    from csitrack.core import CsiFrame
    return [CsiFrame(t0 + k / rate, rng.normal(size=shape) + 1j * rng.normal(size=shape))
            for k in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
