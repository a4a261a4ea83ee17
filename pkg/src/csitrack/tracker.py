"""Differential-unitarity trackers.

For a tracked eigenvector ``u_i`` the pairwise tracker emits

    u_hat_i[k] = u_i[k]^H u_i[k-1],

which has unit magnitude when the subspace direction is unchanged and shrinks
towards zero as it rotates away.

The slope tracker buffers the last ``N`` bases and correlates them across the
window: ``(0, N-1), (1, N-2), ...`` i.e. ``floor(N/2)`` pairs with separations
``N-1, N-3, ...``.  Before correlating, the buffered vectors are phase-aligned
one after the other (each made to have a real, non-negative inner product with
its predecessor), so the cross terms do not depend on the arbitrary phase of
the individual eigenvectors.  The cross terms are reduced to a per-step decay
factor by a least-squares fit of their logarithms against separation through
the origin; a window of two reduces to the pairwise magnitude.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import Axis
from .eigen import EigenBasis

FLOOR_DB = -80.0
CROSSING_TOL = 1e-3


class Variant(enum.Enum):
    PAIRWISE = "pairwise"
    SLOPE = "slope"

    @classmethod
    def parse(cls, value) -> "Variant":
        return value if isinstance(value, cls) else cls(str(value).strip().lower())


@dataclass(frozen=True)
class UnitaritySample:
    timestamp: float
    axis: Axis
    component: int
    value: complex
    magnitude_db: float
    variant: Variant
    window: int = 2
    crossing: bool = False

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass
class TrackerState:
    """Ring buffer of recent eigenbases for one (stream, axis)."""

    axis: Axis = Axis.DY
    components: tuple[int, ...] = (1,)
    variant: Variant = Variant.PAIRWISE
    window: int = 2
    floor_db: float = FLOOR_DB
    bases: deque = field(default=None, repr=False)

    def __post_init__(self):
        self.axis = Axis.parse(self.axis)
        self.variant = Variant.parse(self.variant)
        self.components = tuple(int(c) for c in self.components)
        if not self.components or min(self.components) < 0:
            raise ValueError(f"invalid tracked components {self.components}")
        if self.window < 2:
            raise ValueError(f"tracker window must be >= 2, got {self.window}")
        if self.variant is Variant.PAIRWISE:
            self.window = 2
        self.bases = deque(maxlen=self.window)

    def _push(self, basis: EigenBasis, timestamp: float):
        if self.bases and timestamp < self.bases[-1][1]:
            raise ValueError(f"basis at t={timestamp} precedes buffered t={self.bases[-1][1]}")
        if max(self.components) >= basis.dim:
            raise ValueError(f"tracked component {max(self.components)} >= dimension {basis.dim}")
        self.bases.append((basis, float(timestamp)))


def magnitude_db(value: complex, floor_db: float = FLOOR_DB) -> float:
    mag = abs(value)
    if mag <= 0:
        return floor_db
    return max(floor_db, 20.0 * math.log10(mag))


def unitarity(u_now: np.ndarray, u_prev: np.ndarray) -> complex:
    """``u_now^H u_prev`` with exact 1 for identical vectors and ``|.| <= 1``."""
    if np.array_equal(u_now, u_prev):
        return 1.0 + 0.0j
    z = complex(np.vdot(u_now, u_prev))
    mag = abs(z)
    return z / mag if mag > 1.0 else z


def _crossing(basis: EigenBasis, i: int) -> bool:
    w = basis.eigenvalues
    top = w[0] if w[0] > 0 else 1.0
    near = [abs(w[i] - w[j]) / top < CROSSING_TOL for j in (i - 1, i + 1) if 0 <= j < len(w)]
    return any(near)


def pairwise(state: TrackerState, basis: EigenBasis, timestamp: float = 0.0) -> list[UnitaritySample]:
    """Compare ``basis`` with the previous snapshot, then buffer it.

    The first call has nothing to compare against and returns ``[]``.
    """
    prev = state.bases[-1][0] if state.bases else None
    state._push(basis, timestamp)
    if prev is None:
        return []
    out = []
    for i in state.components:
        u = unitarity(basis.eigenvectors[:, i], prev.eigenvectors[:, i])
        out.append(UnitaritySample(float(timestamp), state.axis, i, u,
                                   magnitude_db(u, state.floor_db), Variant.PAIRWISE, 2,
                                   _crossing(basis, i)))
    return out


def _transport(vectors: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = [vectors[0]]
    for v in vectors[1:]:
        z = complex(np.vdot(v, out[-1]))
        out.append(v * (z / abs(z)) if z != 0 else v)
    return out


def slope_value(vectors: Sequence[np.ndarray], floor_db: float = FLOOR_DB) -> complex:
    """Per-step decay factor of the cross-window correlations of one component."""
    n = len(vectors)
    if n < 2:
        raise ValueError("slope needs at least two snapshots")
    w = _transport(vectors)
    floor = 10.0 ** (floor_db / 20.0)
    num = 0.0 + 0.0j
    den = 0.0
    for t in range(n // 2):
        sep = n - 1 - 2 * t
        c = unitarity(w[n - 1 - t], w[t])
        mag = max(abs(c), floor)
        log_c = math.log(mag) + 1j * (math.atan2(c.imag, c.real) if c != 0 else 0.0)
        num += sep * log_c
        den += sep * sep
    return complex(np.exp(num / den))


def slope(state: TrackerState, basis: EigenBasis, timestamp: float = 0.0) -> list[UnitaritySample]:
    """Buffer ``basis``; once ``window`` snapshots are held, emit one slope sample per component."""
    state._push(basis, timestamp)
    if len(state.bases) < state.window:
        return []
    out = []
    for i in state.components:
        vecs = [b.eigenvectors[:, i] for b, _ in state.bases]
        v = slope_value(vecs, state.floor_db)
        out.append(UnitaritySample(float(timestamp), state.axis, i, v,
                                   magnitude_db(v, state.floor_db), Variant.SLOPE, state.window,
                                   _crossing(basis, i)))
    return out


def update(state: TrackerState, basis: EigenBasis, timestamp: float = 0.0) -> list[UnitaritySample]:
    if state.variant is Variant.PAIRWISE:
        return pairwise(state, basis, timestamp)
    return slope(state, basis, timestamp)


def track(bases: Iterable[EigenBasis], timestamps: Iterable[float] | None = None,
          axis: Axis | str = Axis.DY, variant: Variant | str = Variant.PAIRWISE,
          window: int = 4, components: Sequence[int] = (1,)) -> list[UnitaritySample]:
    state = TrackerState(axis=axis, components=tuple(components), variant=variant, window=window)
    bases = list(bases)
    ts = range(len(bases)) if timestamps is None else timestamps
    out: list[UnitaritySample] = []
    for b, t in zip(bases, ts):
        out.extend(update(state, b, t))
    return out


def magnitudes_db(samples: Sequence[UnitaritySample], component: int | None = None) -> np.ndarray:
    return np.array([s.magnitude_db for s in samples
                     if component is None or s.component == component])


def rate_of_change(samples: Sequence[UnitaritySample]) -> np.ndarray:
    """First difference of ``magnitude_db`` over time, in dB/s."""
    if len(samples) < 2:
        raise ValueError("rate of change needs at least two samples")
    if len({s.component for s in samples}) > 1:
        raise ValueError("samples mix several components; filter to one first")
    t = np.array([s.timestamp for s in samples])
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValueError("timestamps must be strictly increasing")
    return np.diff(magnitudes_db(samples)) / dt
