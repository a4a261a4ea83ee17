"""CSI tensor data model, mode unfoldings and the CSI/CIR duality transform.

A frame holds one complex measurement tensor of shape ``(n_rx, n_tx, n_sc)``.
The third axis is subcarriers when the frame is tagged
``DomainTag.FREQUENCY_CSI`` and delay taps when tagged ``DomainTag.TIME_CIR``.

Unfolding along an axis puts that axis on the rows; the two remaining axes are
collapsed into columns lexicographically, keeping their original order (Rx
outermost, then Tx, then Dy).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Axis(enum.IntEnum):
    """Measurement axis of a CSI tensor."""

    RX = 0
    TX = 1
    DY = 2

    @classmethod
    def parse(cls, value: "Axis | str | int") -> "Axis":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown axis {value!r}; expected one of rx, tx, dy") from None
        return cls(int(value))


class DomainTag(enum.Enum):
    FREQUENCY_CSI = 0
    TIME_CIR = 1

    @classmethod
    def parse(cls, value: "DomainTag | str | int") -> "DomainTag":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            aliases = {"csi": cls.FREQUENCY_CSI, "frequency": cls.FREQUENCY_CSI,
                       "frequency_csi": cls.FREQUENCY_CSI, "cir": cls.TIME_CIR,
                       "time": cls.TIME_CIR, "time_cir": cls.TIME_CIR}
            if key not in aliases:
                raise ValueError(f"unknown domain {value!r}; expected csi or cir")
            return aliases[key]
        return cls(int(value))


class DomainError(ValueError):
    """Raised when a frame is converted to the domain it is already in."""


@dataclass(frozen=True)
class CsiFrame:
    """One timestamped CSI tensor.

    ``data`` is stored as a read-only complex128 array in linear scale.
    """

    timestamp: float
    data: np.ndarray
    domain: DomainTag = DomainTag.FREQUENCY_CSI

    def __post_init__(self):
        data = np.array(self.data, dtype=np.complex128, copy=True)
        if data.ndim != 3 or min(data.shape) < 1:
            raise ValueError(f"CSI data must be a non-empty 3-D tensor, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("CSI data contains NaN or Inf")
        if not np.isfinite(self.timestamp):
            raise ValueError("timestamp must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "timestamp", float(self.timestamp))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, CsiFrame):
            return NotImplemented
        return (self.timestamp == other.timestamp and self.domain == other.domain
                and self.data.shape == other.data.shape and np.array_equal(self.data, other.data))

    __hash__ = None


@dataclass(frozen=True)
class Unfolding:
    axis: Axis
    matrix: np.ndarray
    shape: tuple[int, int, int] = field(default=(0, 0, 0))


def unfold_array(data: np.ndarray, axis: Axis | int) -> np.ndarray:
    """Mode-``axis`` unfolding of a raw 3-D array, shape ``(d_axis, prod(others))``."""
    axis = Axis.parse(axis)
    # moveaxis keeps the other two axes in their original relative order, and the
    # C-order reshape then enumerates them lexicographically.
    return np.moveaxis(np.asarray(data), int(axis), 0).reshape(data.shape[int(axis)], -1)


def fold_array(matrix: np.ndarray, axis: Axis | int, shape: tuple[int, int, int]) -> np.ndarray:
    axis = Axis.parse(axis)
    others = [s for i, s in enumerate(shape) if i != int(axis)]
    tensor = np.asarray(matrix).reshape(shape[int(axis)], *others)
    return np.moveaxis(tensor, 0, int(axis))


def unfold(frame: CsiFrame, axis: Axis | int) -> Unfolding:
    axis = Axis.parse(axis)
    return Unfolding(axis=axis, matrix=unfold_array(frame.data, axis), shape=frame.shape)


def fold(unfolding: Unfolding, timestamp: float = 0.0,
         domain: DomainTag = DomainTag.FREQUENCY_CSI) -> CsiFrame:
    return CsiFrame(timestamp, fold_array(unfolding.matrix, unfolding.axis, unfolding.shape), domain)


def to_domain(frame: CsiFrame, target: DomainTag | str) -> CsiFrame:
    """Convert between CIR and CSI with a unitary DFT along the third axis.

    CIR -> CSI applies the forward DFT, CSI -> CIR the inverse; both are scaled
    by ``1/sqrt(n_sc)`` so Frobenius norms and covariance spectra are preserved.
    """
    target = DomainTag.parse(target)
    if target == frame.domain:
        raise DomainError(f"frame is already in the {target.name} domain")
    if target == DomainTag.FREQUENCY_CSI:
        data = np.fft.fft(frame.data, axis=2, norm="ortho")
    else:
        data = np.fft.ifft(frame.data, axis=2, norm="ortho")
    return CsiFrame(frame.timestamp, data, target)


def check_stream_shape(frames, shape=None):
    """Yield frames unchanged, raising if the tensor shape or time order changes."""
    last_t = -np.inf
    for i, frame in enumerate(frames):
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise ValueError(f"frame {i} has shape {frame.shape}, stream shape is {shape}")
        if frame.timestamp < last_t:
            raise ValueError(f"frame {i} timestamp {frame.timestamp} precedes {last_t}")
        last_t = frame.timestamp
        yield frame
