"""One-sided correlation estimates along a measurement axis.

Two estimators are provided:

* batch (sliding window): ``R = (1/L) sum_n H(n) H(n)^H`` over the last ``L`` frames;
* stochastic (recursive): ``R[k] = lam R[k-1] + (1 - lam) H(k) H(k)^H``.

``H(n)`` is the unfolding of frame ``n`` along the chosen axis, so each frame
contributes its whole unfolding product as a single sample.  Every update
re-symmetrises the result to stop rounding drift away from Hermitian.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import Axis, CsiFrame, unfold_array


@dataclass(frozen=True)
class EstimatorConfig:
    """Covariance estimator settings.

    kind:
        ``"batch"`` or ``"stochastic"``.
    window_len:
        Frames per batch window ``L``; for the stochastic estimator it only
        sets the hop schedule together with ``overlap``.
    forgetting:
        Forgetting factor ``lam`` in ``[0, 1)``.
    overlap:
        Fraction of the window shared by consecutive emitted estimates.
    init:
        Stochastic initialisation, ``"first"`` (first outer product) or ``"zero"``.
    """

    kind: str = "batch"
    window_len: int = 25
    forgetting: float = 0.99
    overlap: float = 0.0
    init: str = "first"

    def __post_init__(self):
        if self.kind not in ("batch", "stochastic"):
            raise ValueError(f"estimator kind must be 'batch' or 'stochastic', got {self.kind!r}")
        if int(self.window_len) != self.window_len or self.window_len < 1:
            raise ValueError(f"window_len must be an integer >= 1, got {self.window_len}")
        if not 0.0 <= self.forgetting < 1.0:
            raise ValueError(f"forgetting factor must lie in [0, 1), got {self.forgetting}")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError(f"overlap must lie in [0, 1), got {self.overlap}")
        if self.init not in ("first", "zero"):
            raise ValueError(f"init must be 'first' or 'zero', got {self.init!r}")
        object.__setattr__(self, "window_len", int(self.window_len))

    @property
    def hop(self) -> float:
        """Exact (possibly fractional) hop between emitted estimates, in frames."""
        return max(1.0, self.window_len * (1.0 - self.overlap))


@dataclass(frozen=True)
class CovarianceEstimate:
    axis: Axis
    matrix: np.ndarray
    sample_count: int
    estimator: EstimatorConfig
    timestamp: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def empty(cls, axis: Axis | str, dim: int, estimator: EstimatorConfig | None = None):
        return cls(Axis.parse(axis), np.zeros((dim, dim), dtype=np.complex128), 0,
                   estimator or EstimatorConfig())


@dataclass(frozen=True)
class WindowPlan:
    window_len: int
    hop: int
    hop_exact: float
    update_rate: float


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def outer(frame: CsiFrame, axis: Axis) -> np.ndarray:
    h = unfold_array(frame.data, axis)
    return h @ h.conj().T


def _unfold_checked(frame: CsiFrame, state: CovarianceEstimate) -> np.ndarray:
    h = unfold_array(frame.data, state.axis)
    if h.shape[0] != state.dim:
        raise ValueError(f"frame has {h.shape[0]} entries along {state.axis.name}, "
                         f"estimate dimension is {state.dim}")
    return h


def update_stochastic(state: CovarianceEstimate, frame: CsiFrame) -> CovarianceEstimate:
    lam = state.estimator.forgetting
    h = _unfold_checked(frame, state)
    inst = h @ h.conj().T
    if state.sample_count == 0 and state.estimator.init == "first":
        matrix = inst
    else:
        matrix = lam * state.matrix + (1.0 - lam) * inst
    return replace(state, matrix=hermitian_part(matrix), sample_count=state.sample_count + 1,
                   timestamp=frame.timestamp)


def _batch_matrix(unfoldings: Sequence[np.ndarray]) -> np.ndarray:
    stacked = np.concatenate(unfoldings, axis=1)
    return hermitian_part(stacked @ stacked.conj().T / len(unfoldings))


def update_batch(state: CovarianceEstimate, window: Sequence[CsiFrame]) -> CovarianceEstimate:
    L = state.estimator.window_len
    if len(window) != L:
        raise ValueError(f"batch window must hold {L} frames, got {len(window)}")
    matrix = _batch_matrix([_unfold_checked(f, state) for f in window])
    return replace(state, matrix=matrix, sample_count=state.sample_count + L,
                   timestamp=window[-1].timestamp)


def stationarity_to_window(period: float, sample_rate: float, overlap: float = 0.0) -> WindowPlan:
    """Frames per stationarity window and the hop between covariance updates.

    ``update_rate`` uses the exact fractional hop ``L * (1 - overlap)``, which is
    what the fractional-hop emission schedule in :func:`estimate_stream` achieves
    on average; ``hop`` is that value rounded to whole frames.
    """
    if period <= 0 or sample_rate <= 0:
        raise ValueError("stationarity period and sample rate must be positive")
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must lie in [0, 1), got {overlap}")
    if period * sample_rate < 1 - 1e-9:
        raise ValueError("stationarity period is shorter than one sample")
    L = max(1, int(math.floor(period * sample_rate + 0.5)))
    hop_exact = max(1.0, L * (1.0 - overlap))
    hop = max(1, int(round(L * (1.0 - overlap))))
    return WindowPlan(window_len=L, hop=hop, hop_exact=hop_exact,
                      update_rate=sample_rate / hop_exact)


def _emission_indices(window_len: int, hop: float) -> Iterator[int]:
    j = 0
    while True:
        yield window_len - 1 + int(math.floor(j * hop + 1e-9))
        j += 1


class StreamingEstimator:
    """Push-style estimator: feed frames one at a time, get an estimate on each hop.

    The first estimate is emitted once ``window_len`` frames have been seen;
    later ones follow every ``config.hop`` frames (fractional hops alternate
    between the neighbouring integers).  Memory stays at ``O(window_len)``.
    """

    def __init__(self, axis: Axis | str, config: EstimatorConfig):
        self.axis = Axis.parse(axis)
        self.config = config
        self._schedule = _emission_indices(config.window_len, config.hop)
        self._next = next(self._schedule)
        self._buffer: deque[np.ndarray] = deque(maxlen=config.window_len)
        self._n = 0
        self.state: CovarianceEstimate | None = None

    def push(self, frame: CsiFrame) -> CovarianceEstimate | None:
        cfg = self.config
        if self.state is None:
            self.state = CovarianceEstimate.empty(self.axis, frame.shape[int(self.axis)], cfg)
        if cfg.kind == "stochastic":
            self.state = update_stochastic(self.state, frame)
        else:
            self._buffer.append(_unfold_checked(frame, self.state))
        n = self._n
        self._n += 1
        if n != self._next:
            return None
        if cfg.kind == "batch":
            self.state = replace(self.state, matrix=_batch_matrix(self._buffer),
                                 sample_count=self.state.sample_count + cfg.window_len,
                                 timestamp=frame.timestamp)
        while self._next <= n:
            self._next = next(self._schedule)
        return self.state


def estimate_stream(frames: Iterable[CsiFrame], axis: Axis | str,
                    config: EstimatorConfig) -> Iterator[CovarianceEstimate]:
    """Run an estimator over a frame stream, emitting one estimate per hop."""
    est = StreamingEstimator(axis, config)
    for frame in frames:
        out = est.push(frame)
        if out is not None:
            yield out
