"""MSE-guided signal/noise subspace boundaries and fractional subspace energy.

Nulling every eigenvalue past index ``i`` gives the truncated reconstruction
``R_i = U diag(d_0..d_{i-1}, 0, ...) U^H``.  Its error against ``R`` is

    MSE(i) = ||R - R_i||_F^2 / d^2 = sum_{j >= i} d_j^2 / d^2,

and the boundary for a target distortion is where the normalised curve
``MSE(i) / MSE(0)`` first falls below the target.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .eigen import EigenBasis

MSE_SWEEP_DB = tuple(float(t) for t in range(-3, -25, -3))


@dataclass(frozen=True)
class SubspacePartition:
    """Signal/noise split of one eigenbasis at a target distortion.

    ``mse_curve[i]`` is the absolute reconstruction MSE when keeping ``i``
    components (``i = 0..d``); ``boundary`` is fractional, in ``[1, d]``.
    """

    boundary: float
    target_mse_db: float
    e_s: float
    mse_curve: np.ndarray
    saturated: bool = False

    @property
    def normalized_curve_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.mse_curve / self.mse_curve[0])


def _check_keep(basis: EigenBasis, keep: int) -> int:
    if int(keep) != keep or not 0 <= keep <= basis.dim:
        raise ValueError(f"kept component count must lie in [0, {basis.dim}], got {keep}")
    return int(keep)


def mse_curve(basis: EigenBasis) -> np.ndarray:
    """Closed-form ``MSE(i)`` for ``i = 0..d``."""
    d = basis.dim
    sq = basis.eigenvalues.astype(float) ** 2
    tail = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    return tail / d**2


def reconstruction_mse(basis: EigenBasis, keep: int) -> float:
    keep = _check_keep(basis, keep)
    return float(mse_curve(basis)[keep])


def truncated_matrix(basis: EigenBasis, keep: float) -> np.ndarray:
    """Reconstruction from the leading components; a fractional ``keep`` weights the next one."""
    if not 0 <= keep <= basis.dim:
        raise ValueError(f"kept component count must lie in [0, {basis.dim}], got {keep}")
    weights = np.clip(keep - np.arange(basis.dim), 0.0, 1.0)
    U = basis.eigenvectors
    return (U * (basis.eigenvalues * weights)) @ U.conj().T


def reconstruction_mse_explicit(basis: EigenBasis, keep: int,
                                matrix: np.ndarray | None = None) -> float:
    """``||R - R_i||_F^2 / d^2`` by forming both matrices.

    ``matrix`` defaults to ``U diag(d) U^H``; pass the original covariance to
    check the decomposition as well.
    """
    keep = _check_keep(basis, keep)
    R = basis.matrix() if matrix is None else np.asarray(matrix)
    err = R - truncated_matrix(basis, keep)
    return float(np.sum(np.abs(err) ** 2) / basis.dim**2)


def fractional_energy(basis: EigenBasis, boundary: float) -> float:
    d = basis.dim
    if not 1 <= boundary <= d:
        raise ValueError(f"boundary must lie in [1, {d}], got {boundary}")
    total = basis.trace
    if total <= 0:
        raise ValueError("eigenbasis has zero total energy")
    weights = np.clip(boundary - np.arange(d), 0.0, 1.0)
    return float(min(1.0, np.sum(basis.eigenvalues * weights) / total))


def find_boundary(basis: EigenBasis, target_db: float) -> SubspacePartition:
    """Fractional signal/noise boundary meeting ``target_db`` normalised MSE.

    The first kept-count ``i`` whose normalised MSE is at or below the target
    is located, and the crossing is placed by linear interpolation of the
    normalised MSE between ``i - 1`` and ``i``.
    """
    if not target_db < 0:
        raise ValueError(f"target distortion must be negative dB, got {target_db}")
    d = basis.dim
    curve = mse_curve(basis)
    if curve[0] <= 0:
        raise ValueError("eigenbasis has zero total energy")
    norm = curve / curve[0]
    target = 10.0 ** (target_db / 10.0)
    hits = np.nonzero(norm <= target)[0]
    if hits.size == 0:
        boundary, saturated = float(d), True
    else:
        i = int(hits[0])
        if i == 0:
            boundary = 1.0
        else:
            hi, lo = norm[i - 1], norm[i]
            frac = (hi - target) / (hi - lo) if hi > lo else 1.0
            boundary = (i - 1) + frac
        boundary, saturated = float(min(max(boundary, 1.0), d)), False
    return SubspacePartition(boundary=boundary, target_mse_db=float(target_db),
                             e_s=fractional_energy(basis, boundary), mse_curve=curve,
                             saturated=saturated)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def normalized_mi(series_a, series_b, bins: int = 16) -> float:
    """Histogram mutual information normalised by ``sqrt(H(a) H(b))``.

    Both series share the same bin edges, spanning their pooled min/max.
    A constant input has zero entropy; the result is then 0 and a
    ``RuntimeWarning`` is issued.
    """
    a = np.asarray(series_a, dtype=float).ravel()
    b = np.asarray(series_b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"series lengths differ: {a.size} vs {b.size}")
    if a.size < 100:
        raise ValueError(f"need at least 100 paired samples, got {a.size}")
    if bins < 2:
        raise ValueError("need at least 2 bins")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if hi <= lo:
        warnings.warn("normalized_mi: degenerate (constant) series, returning 0", RuntimeWarning,
                      stacklevel=2)
        return 0.0
    edges = np.linspace(lo, hi, bins + 1)
    joint, _, _ = np.histogram2d(a, b, bins=[edges, edges])
    joint /= joint.sum()
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    ha, hb = _entropy(pa), _entropy(pb)
    if ha == 0 or hb == 0:
        warnings.warn("normalized_mi: degenerate (constant) series, returning 0", RuntimeWarning,
                      stacklevel=2)
        return 0.0
    nz = joint > 0
    mi = float(np.sum(joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz])))
    return float(min(1.0, max(0.0, mi / math.sqrt(ha * hb))))


def covariance_entries(matrix: np.ndarray) -> np.ndarray:
    """Real and imaginary parts of every entry, pooled into one vector."""
    m = np.asarray(matrix)
    return np.concatenate([m.real.ravel(), m.imag.ravel()])
