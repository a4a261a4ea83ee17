"""Synthetic human-modulated MIMO channel with known subspace structure.

The Dy unfolding of each frame is generated as

    H_(3)[k] = A[k] G[k] / sqrt(n_rx n_tx),    A[k] A[k]^H = C[k] + noise_power I,

where ``C[k] = U_s[k] diag(signal_eigenvalues) U_s[k]^H`` is the planted rank-M_s
signal covariance and ``G`` evolves by the elementwise recursion

    G[k+1] = W * G[k] + sqrt(1 - W) * Xi[k],    Xi ~ CN(0, innovation_variance).

With that innovation gain each entry of ``G`` settles at variance
``innovation_variance / (1 + w)``, so frames are emitted from ``sqrt(1 + W) * G``
and ``G[0]`` is drawn from the stationary law.  The stream is then wide-sense
stationary from the first frame with
``E[H_(3) H_(3)^H] = innovation_variance (C[k] + noise_power I)`` for any ``W``.
Rx/Tx structure is not modelled separately: those correlations follow from ``G``.

The planted basis ``U_s`` wanders over the Grassmannian: each step rotates every
column by ``volatility`` radians towards a direction in its orthogonal
complement.  The direction follows an AR(1) process with coefficient
``rotation_memory``, so motion persists over ``~1/(1 - rotation_memory)`` frames;
zero memory gives an i.i.d. random walk.  Scripted events add rotation along
a geodesic whose direction is drawn once per event from a separate random
stream, so they never perturb the base draws.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .core import CsiFrame, DomainTag, fold_array

EVENT_KINDS = ("impulse-rotation", "sustained-rotation")


@dataclass(frozen=True)
class Event:
    """Scripted subspace rotation.

    ``impulse-rotation`` turns the planted basis by ``magnitude`` radians in a
    single step at ``time``; ``sustained-rotation`` adds ``magnitude`` radians per
    frame for ``duration`` seconds starting at ``time``.
    """

    time: float
    kind: str = "impulse-rotation"
    magnitude: float = np.pi / 2
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"event kind must be one of {EVENT_KINDS}, got {self.kind!r}")
        if self.magnitude < 0 or self.duration < 0 or self.time < 0:
            raise ValueError("event time, magnitude and duration must be non-negative")

    def frames(self, sample_rate: float) -> range:
        start = int(round(self.time * sample_rate))
        if self.kind == "impulse-rotation":
            return range(start, start + 1)
        return range(start, start + max(1, int(round(self.duration * sample_rate))))


@dataclass(frozen=True)
class ChannelSimConfig:
    dims: tuple[int, int, int] = (3, 3, 30)
    sample_rate: float = 500.0
    correlation: float | list = 0.999
    innovation_variance: float = 1.0
    signal_rank: int = 2
    signal_eigenvalues: tuple[float, ...] = (1.0, 0.5)
    noise_power: float = 1e-4
    volatility: float = 0.01
    rotation_memory: float = 0.95
    seed: int = 0
    domain: str = "csi"
    events: tuple[Event, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) < 1:
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        eig = tuple(float(e) for e in self.signal_eigenvalues)
        object.__setattr__(self, "signal_eigenvalues", eig)
        object.__setattr__(self, "events", tuple(
            e if isinstance(e, Event) else Event(**e) for e in self.events))
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.signal_rank < 1 or len(eig) != self.signal_rank:
            raise ValueError(f"need {self.signal_rank} signal eigenvalues, got {len(eig)}")
        if 2 * self.signal_rank > dims[2]:
            raise ValueError("signal rank must be at most half the Dy dimension")
        if min(eig) <= self.noise_power:
            raise ValueError("planted signal eigenvalues must exceed the noise power")
        if not 0.0 <= self.rotation_memory < 1.0:
            raise ValueError("rotation_memory must lie in [0, 1)")
        if self.noise_power < 0 or self.innovation_variance <= 0 or self.volatility < 0:
            raise ValueError("noise power, innovation variance and volatility must be non-negative")
        W = np.asarray(self.correlation, dtype=float)
        if np.any(W < 0) or np.any(W > 1):
            raise ValueError("correlation entries must lie in [0, 1]")
        try:
            np.broadcast_to(W, (dims[2], dims[0] * dims[1]))
        except ValueError:
            raise ValueError("correlation must broadcast to the Dy unfolding shape "
                             f"({dims[2]}, {dims[0] * dims[1]})") from None
        DomainTag.parse(self.domain)
        _check_events(self.events, self.sample_rate)

    def to_json(self) -> str:
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["signal_eigenvalues"] = list(self.signal_eigenvalues)
        d["correlation"] = np.asarray(self.correlation).tolist()
        d["events"] = [asdict(e) for e in self.events]
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChannelSimConfig":
        d = json.loads(text)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown simulator config fields: {sorted(unknown)}")
        for key in ("dims", "signal_eigenvalues", "events"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class GroundTruth:
    """Latent state behind one frame; tensors are folded on access."""

    timestamp: float
    signal_basis: np.ndarray
    signal_rank: int
    signal_unfolded: np.ndarray = field(repr=False)
    noise_unfolded: np.ndarray = field(repr=False)
    config: ChannelSimConfig = field(repr=False)

    @property
    def covariance(self) -> np.ndarray:
        """``E[H_(3) H_(3)^H]`` for this step: innovation_variance * (C + noise_power I)."""
        cfg = self.config
        U = self.signal_basis
        C = (U * np.asarray(cfg.signal_eigenvalues)) @ U.conj().T
        return cfg.innovation_variance * (C + cfg.noise_power * np.eye(U.shape[0]))

    @property
    def signal(self) -> np.ndarray:
        return fold_array(self.signal_unfolded, 2, self.config.dims)

    @property
    def noise(self) -> np.ndarray:
        return fold_array(self.noise_unfolded, 2, self.config.dims)


@dataclass
class SimState:
    config: ChannelSimConfig
    step: int
    basis: np.ndarray
    latent: np.ndarray
    direction: np.ndarray
    rng: np.random.Generator
    event_rng: np.random.Generator
    event_frames: dict = field(default_factory=dict)
    event_id: int = -1
    event_direction: np.ndarray | None = None


def _check_events(events: Sequence[Event], sample_rate: float):
    spans = sorted((r.start, r.stop) for r in (e.frames(sample_rate) for e in events
                                                if e.magnitude > 0))
    for (_, a1), (b0, _) in zip(spans, spans[1:]):
        if b0 < a1:
            raise ValueError("scripted events overlap")


def _cn(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    s = np.sqrt(variance / 2.0)
    return rng.normal(0.0, s, shape) + 1j * rng.normal(0.0, s, shape)


def _orthonormal(X: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(X)
    d = np.diag(R)
    ph = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return Q * ph


def _rotate(basis: np.ndarray, angle: float, Z: np.ndarray) -> np.ndarray:
    """Turn every column of ``basis`` by ``angle`` towards ``Z`` projected off the basis."""
    if angle == 0:
        return basis
    m = basis.shape[1]
    Q = _orthonormal(np.concatenate([basis, Z], axis=1))[:, m:]
    return basis * np.cos(angle) + Q * np.sin(angle)


def _event_rotation(state: SimState, basis: np.ndarray, angle: float, event_id: int) -> np.ndarray:
    if event_id != state.event_id:
        state.event_id = event_id
        state.event_direction = _cn(state.event_rng, basis.shape)
    D = state.event_direction
    # projecting the previous direction off the moved basis keeps the path on a geodesic
    D = D - basis @ (basis.conj().T @ D)
    state.event_direction = D
    return _rotate(basis, angle, D)


def initial_state(config: ChannelSimConfig) -> SimState:
    rng = np.random.default_rng([config.seed, 0])
    event_rng = np.random.default_rng([config.seed, 1])
    n_rx, n_tx, n_sc = config.dims
    basis = _orthonormal(_cn(rng, (n_sc, config.signal_rank)))
    W = np.asarray(config.correlation, dtype=float)
    latent = _cn(rng, (n_sc, n_rx * n_tx)) * np.sqrt(config.innovation_variance / (1.0 + W))
    direction = _cn(rng, basis.shape)
    schedule = {}
    for i, ev in enumerate(config.events):
        if ev.magnitude == 0:
            continue
        for k in ev.frames(config.sample_rate):
            schedule[k] = (ev.magnitude, i)
    return SimState(config, 0, basis, latent, direction, rng, event_rng, schedule)


def _frame_from(state: SimState) -> tuple[CsiFrame, GroundTruth]:
    cfg = state.config
    n_rx, n_tx, n_sc = cfg.dims
    U = state.basis
    lam = np.asarray(cfg.signal_eigenvalues)
    sigma = np.sqrt(cfg.noise_power)
    gain = np.sqrt((1.0 + np.asarray(cfg.correlation, dtype=float)) / (n_rx * n_tx))
    G = state.latent * gain
    # A = U diag(sqrt(lam + s2)) U^H + sigma (I - U U^H), split into signal and noise parts
    proj = U.conj().T @ G
    signal = U @ ((np.sqrt(lam + cfg.noise_power) - sigma)[:, None] * proj)
    noise = sigma * G
    H3 = signal + noise
    t = state.step / cfg.sample_rate
    domain = DomainTag.parse(cfg.domain)
    frame = CsiFrame(t, fold_array(H3, 2, cfg.dims), domain)
    truth = GroundTruth(t, U, cfg.signal_rank, signal, noise, cfg)
    return frame, truth


def step(state: SimState, config: ChannelSimConfig | None = None) -> tuple[CsiFrame, GroundTruth]:
    """Emit the frame for the current step, then advance the latent process and basis."""
    cfg = config or state.config
    frame, truth = _frame_from(state)
    W = np.asarray(cfg.correlation, dtype=float)
    xi = _cn(state.rng, state.latent.shape, cfg.innovation_variance)
    state.latent = W * state.latent + np.sqrt(1.0 - W) * xi
    a = cfg.rotation_memory
    U = state.basis
    # tangent velocity, transported to the current point by projection
    D = a * state.direction + np.sqrt(1.0 - a * a) * _cn(state.rng, U.shape)
    state.direction = D - U @ (U.conj().T @ D)
    basis = _rotate(U, cfg.volatility, state.direction)
    scripted = state.event_frames.get(state.step + 1)
    if scripted:
        basis = _event_rotation(state, basis, *scripted)
    state.step += 1
    if basis is not state.basis and state.step % 256 == 0:
        basis = _orthonormal(basis)
    state.basis = basis
    return frame, truth


def iter_stream(config: ChannelSimConfig, n_frames: int | None = None) -> Iterator[tuple[CsiFrame, GroundTruth]]:
    state = initial_state(config)
    k = 0
    while n_frames is None or k < n_frames:
        yield step(state)
        k += 1


def generate_stream(config: ChannelSimConfig, n_frames: int) -> tuple[list[CsiFrame], list[GroundTruth]]:
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    frames, truths = [], []
    for f, g in iter_stream(config, n_frames):
        frames.append(f)
        truths.append(g)
    return frames, truths


def plant_event(config: ChannelSimConfig, event: Event | dict, n_frames: int | None = None) -> ChannelSimConfig:
    """Return a copy of ``config`` with ``event`` added to its script."""
    ev = event if isinstance(event, Event) else Event(**event)
    if n_frames is not None and ev.frames(config.sample_rate).start >= n_frames:
        raise ValueError(f"event at t={ev.time}s falls outside a {n_frames}-frame stream")
    return replace(config, events=tuple(config.events) + (ev,))


def static_config(**overrides) -> ChannelSimConfig:
    """A channel that never changes: no rotation and a frozen latent process."""
    return ChannelSimConfig(**{"correlation": 1.0, "volatility": 0.0, **overrides})
