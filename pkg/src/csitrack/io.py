"""Binary CSI record files.

Layout, little-endian throughout::

    header   magic b"CSIS1" | n_rx u16 | n_tx u16 | n_sc u16 | sample_rate f64 | domain u8
    record   timestamp f64 | n_rx*n_tx*n_sc complex values as interleaved (re, im) f32

Values are stored Rx-major, then Tx, then subcarrier, which is the C order of
a ``(n_rx, n_tx, n_sc)`` array.  Domain byte 0 is CSI, 1 is CIR.
"""

from __future__ import annotations

import io
import os
import struct
import sys
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .core import CsiFrame, DomainTag

MAGIC = b"CSIS1"
HEADER = struct.Struct("<5sHHHdB")
TIMESTAMP = struct.Struct("<d")
_DOMAIN_BYTES = {DomainTag.FREQUENCY_CSI: 0, DomainTag.TIME_CIR: 1}
_BYTE_DOMAINS = {v: k for k, v in _DOMAIN_BYTES.items()}


class RecordFileError(ValueError):
    """Base class for malformed record files."""


class BadMagicError(RecordFileError):
    pass


class TruncatedRecordError(RecordFileError):
    def __init__(self, index: int, got: int, want: int):
        super().__init__(f"record {index} is truncated: {got} of {want} bytes")
        self.index = index


class DimensionMismatchError(RecordFileError):
    pass


class TimestampOrderError(RecordFileError):
    pass


@dataclass(frozen=True)
class RecordHeader:
    dims: tuple[int, int, int]
    sample_rate: float
    domain: DomainTag

    @property
    def values_per_record(self) -> int:
        n_rx, n_tx, n_sc = self.dims
        return n_rx * n_tx * n_sc

    @property
    def record_size(self) -> int:
        return TIMESTAMP.size + 8 * self.values_per_record

    def pack(self) -> bytes:
        if max(self.dims) > 0xFFFF or min(self.dims) < 1:
            raise DimensionMismatchError(f"dims {self.dims} do not fit unsigned 16-bit fields")
        return HEADER.pack(MAGIC, *self.dims, float(self.sample_rate), _DOMAIN_BYTES[self.domain])

    @classmethod
    def unpack(cls, raw: bytes) -> "RecordHeader":
        if len(raw) < len(MAGIC) or raw[:len(MAGIC)] != MAGIC:
            raise BadMagicError(f"bad magic {raw[:len(MAGIC)]!r}, expected {MAGIC!r}")
        if len(raw) < HEADER.size:
            raise RecordFileError(f"header is truncated: {len(raw)} of {HEADER.size} bytes")
        _, n_rx, n_tx, n_sc, rate, dom = HEADER.unpack(raw)
        if dom not in _BYTE_DOMAINS:
            raise RecordFileError(f"unknown domain byte {dom}")
        if min(n_rx, n_tx, n_sc) < 1:
            raise DimensionMismatchError(f"header dims ({n_rx}, {n_tx}, {n_sc}) must be positive")
        return cls((n_rx, n_tx, n_sc), rate, _BYTE_DOMAINS[dom])


def _open_binary(target, mode: str):
    """Return ``(handle, should_close)``; ``"-"`` maps to stdin/stdout."""
    if target == "-" or target is None:
        std = sys.stdin if "r" in mode else sys.stdout
        return std.buffer, False
    if isinstance(target, (str, os.PathLike)):
        return open(target, mode), True
    return target, False


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    chunks, got = [], 0
    while got < n:
        b = fh.read(n - got)
        if not b:
            break
        chunks.append(b)
        got += len(b)
    return b"".join(chunks)


def encode_frame(frame: CsiFrame, header: RecordHeader) -> bytes:
    if frame.shape != header.dims:
        raise DimensionMismatchError(f"frame dims {frame.shape} differ from header dims {header.dims}")
    if DomainTag.parse(frame.domain) is not header.domain:
        raise RecordFileError(f"frame domain {frame.domain} differs from file domain {header.domain}")
    values = np.ascontiguousarray(frame.data, dtype="<c8").view("<f4")
    return TIMESTAMP.pack(float(frame.timestamp)) + values.tobytes()


def decode_record(raw: bytes, header: RecordHeader) -> CsiFrame:
    (t,) = TIMESTAMP.unpack_from(raw)
    vals = np.frombuffer(raw, dtype="<f4", offset=TIMESTAMP.size)
    data = vals.view("<c8").reshape(header.dims)
    return CsiFrame(t, data, header.domain)


def read_header(source) -> RecordHeader:
    fh, close = _open_binary(source, "rb")
    try:
        return RecordHeader.unpack(_read_exact(fh, HEADER.size))
    finally:
        if close:
            fh.close()


def iter_records(fh: BinaryIO, header: RecordHeader) -> Iterator[CsiFrame]:
    size = header.record_size
    last = -np.inf
    index = 0
    while True:
        raw = _read_exact(fh, size)
        if not raw:
            return
        if len(raw) < size:
            raise TruncatedRecordError(index, len(raw), size)
        frame = decode_record(raw, header)
        if frame.timestamp < last:
            raise TimestampOrderError(f"record {index} timestamp {frame.timestamp} precedes {last}")
        last = frame.timestamp
        yield frame
        index += 1


def read_stream(source, expected_dims: tuple[int, int, int] | None = None) -> Iterator[CsiFrame]:
    """Yield frames one record at a time; only one record is held in memory.

    ``source`` is a path, ``"-"`` for stdin, or a binary file object.
    """
    fh, close = _open_binary(source, "rb")
    try:
        header = RecordHeader.unpack(_read_exact(fh, HEADER.size))
        if expected_dims is not None and tuple(expected_dims) != header.dims:
            raise DimensionMismatchError(f"file dims {header.dims} differ from expected {tuple(expected_dims)}")
        yield from iter_records(fh, header)
    finally:
        if close:
            fh.close()


def open_stream(source) -> tuple[RecordHeader, Iterator[CsiFrame]]:
    """Header plus a lazy frame iterator; the file closes when the iterator is exhausted."""
    fh, close = _open_binary(source, "rb")
    try:
        header = RecordHeader.unpack(_read_exact(fh, HEADER.size))
    except BaseException:
        if close:
            fh.close()
        raise

    def frames():
        try:
            yield from iter_records(fh, header)
        finally:
            if close:
                fh.close()

    return header, frames()


def write_stream(target, frames: Iterable[CsiFrame], sample_rate: float,
                 header: RecordHeader | None = None) -> int:
    """Write frames to ``target`` and return the record count.

    Values are narrowed to float32, so a second write/read cycle is bit-exact.
    """
    fh, close = _open_binary(target, "wb")
    count = 0
    last = -np.inf
    try:
        if header is not None:
            fh.write(header.pack())
        for frame in frames:
            if header is None:
                header = RecordHeader(frame.shape, sample_rate, DomainTag.parse(frame.domain))
                fh.write(header.pack())
            if frame.timestamp < last:
                raise TimestampOrderError(f"frame {count} timestamp {frame.timestamp} precedes {last}")
            last = frame.timestamp
            fh.write(encode_frame(frame, header))
            count += 1
        if header is None:
            raise RecordFileError("cannot write an empty stream without a header")
        fh.flush()
    finally:
        if close:
            fh.close()
    return count


def to_bytes(frames: Iterable[CsiFrame], sample_rate: float) -> bytes:
    buf = io.BytesIO()
    write_stream(buf, frames, sample_rate)
    return buf.getvalue()
