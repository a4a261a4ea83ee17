"""Deterministic Hermitian eigendecomposition of covariance estimates.

Eigenvalues come out in descending order.  Within a cluster of (near-)equal
eigenvalues the eigenvectors are arbitrary, so the cluster is re-based onto a
canonical basis derived from its spectral projector, and its columns are then
ordered by the row index of their largest-magnitude entry.  Finally every
column is rotated so that its largest-magnitude entry is real and non-negative.
The result depends only on the input matrix, not on LAPACK's choices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .covariance import CovarianceEstimate

# relative eigenvalue gap (w.r.t. the spectral radius) below which two
# eigenvalues are treated as degenerate
CLUSTER_TOL = 1e-10
NEGATIVE_TOL = 1e-9


class EigenError(ValueError):
    """Non-finite, non-Hermitian, indefinite or non-convergent input."""


@dataclass(frozen=True)
class EigenBasis:
    """Sorted eigenvalues and phase-canonical eigenvectors of a covariance.

    ``eigenvectors[:, i]`` pairs with ``eigenvalues[i]``; the first ``i``
    columns span the ``i``-th space of the filtration ``V_0 < V_1 < ...``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    def matrix(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T

    def span(self, i: int) -> np.ndarray:
        """Orthonormal basis of the subspace spanned by the leading ``i`` eigenvectors."""
        if not 0 <= i <= self.dim:
            raise ValueError(f"subspace index must lie in [0, {self.dim}], got {i}")
        return self.eigenvectors[:, :i]

    def split(self, m_s: int) -> "SubspaceSplit":
        return split(self, m_s)


@dataclass(frozen=True)
class SubspaceSplit:
    m_s: int
    m_n: int
    signal_basis: np.ndarray
    noise_basis: np.ndarray
    signal_eigenvalues: np.ndarray
    noise_eigenvalues: np.ndarray


def canonical_phase(U: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and >= 0.

    Near-ties for the largest entry resolve to the lowest row index.
    """
    U = np.array(U, dtype=np.complex128, copy=True)
    mags = np.abs(U)
    peak = mags.max(axis=0)
    rows = np.argmax(mags >= peak * (1 - 1e-9), axis=0)
    pivot = U[rows, np.arange(U.shape[1])]
    # exp(-j angle) is exactly 1 for an already canonical column, so this is idempotent
    U *= np.exp(-1j * np.angle(pivot))
    U[rows, np.arange(U.shape[1])] = np.abs(U[rows, np.arange(U.shape[1])])
    return U


def _peak_rows(U: np.ndarray) -> np.ndarray:
    mags = np.abs(U)
    return np.argmax(mags >= mags.max(axis=0) * (1 - 1e-9), axis=0)


def _clusters(values: np.ndarray, tol: float) -> list[tuple[int, int]]:
    out = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i - 1] - values[i] > tol:
            out.append((start, i))
            start = i
    return out


def _canonical_cluster_basis(V: np.ndarray) -> np.ndarray:
    P = V @ V.conj().T
    Q, _, _ = scipy.linalg.qr(P, pivoting=True, mode="economic")
    return Q[:, :V.shape[1]]


def eigendecompose(cov: CovarianceEstimate | np.ndarray) -> EigenBasis:
    R = cov.matrix if isinstance(cov, CovarianceEstimate) else np.asarray(cov)
    R = np.asarray(R, dtype=np.complex128)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] == 0:
        raise EigenError(f"expected a non-empty square matrix, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise EigenError("covariance contains NaN or Inf")
    scale = max(float(np.max(np.abs(R))), np.finfo(float).tiny)
    if np.max(np.abs(R - R.conj().T)) > 1e-8 * scale:
        raise EigenError("covariance is not Hermitian")
    R = 0.5 * (R + R.conj().T)
    try:
        w, V = scipy.linalg.eigh(R, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigenError(f"eigendecomposition did not converge: {exc}") from exc

    w = w[::-1].copy()
    V = V[:, ::-1]
    trace = float(np.sum(np.abs(w)))
    if w[-1] < -NEGATIVE_TOL * max(trace, np.finfo(float).tiny):
        raise EigenError(f"covariance is indefinite (smallest eigenvalue {w[-1]:.3e})")
    w[w < 0] = 0.0

    radius = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    U = np.empty_like(V)
    for lo, hi in _clusters(w, CLUSTER_TOL * radius):
        block = V[:, lo:hi]
        if hi - lo > 1:
            block = _canonical_cluster_basis(block)
            order = np.argsort(_peak_rows(block), kind="stable")
            block = block[:, order]
            w[lo:hi] = np.mean(w[lo:hi])
        U[:, lo:hi] = block
    U = canonical_phase(U)
    w.setflags(write=False)
    U.setflags(write=False)
    return EigenBasis(w, U)


def split(basis: EigenBasis, m_s: int) -> SubspaceSplit:
    d = basis.dim
    if int(m_s) != m_s or not 1 <= m_s <= d:
        raise ValueError(f"signal dimension must lie in [1, {d}], got {m_s}")
    m_s = int(m_s)
    U, w = basis.eigenvectors, basis.eigenvalues
    return SubspaceSplit(m_s, d - m_s, U[:, :m_s], U[:, m_s:], w[:m_s], w[m_s:])
