"""Spectrograms, empirical CDFs and dispersion of tracker series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.signal

MAG_FLOOR_DB = -200.0


@dataclass(frozen=True)
class Spectrogram:
    """Short-time Fourier magnitude of a real series.

    ``power[f, t]`` is one-sided and scaled so that summing over ``f`` gives the
    energy of the windowed frame; ``magnitude_db`` is ``20 log10 |X|`` of the
    raw DFT.
    """

    times: np.ndarray
    frequencies: np.ndarray
    magnitude_db: np.ndarray
    power: np.ndarray
    window_len: float
    overlap: float
    nperseg: int
    hop: int
    sample_rate: float

    def band_energy(self, f_lo: float, f_hi: float = math.inf) -> np.ndarray:
        """Per-frame energy in ``f_lo <= f < f_hi``."""
        mask = (self.frequencies >= f_lo) & (self.frequencies < f_hi)
        return self.power[mask].sum(axis=0)


def nearest_pow2(n: float) -> int:
    if n < 1:
        raise ValueError(f"window must span at least one sample, got {n}")
    lo = 2 ** int(math.floor(math.log2(n)))
    hi = lo * 2
    return lo if n - lo <= hi - n else hi


def spectrogram_params(sample_rate: float, window: float, overlap: float) -> tuple[int, int]:
    """``(nperseg, hop)`` in samples for a window in seconds."""
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must lie in [0, 1), got {overlap}")
    nperseg = nearest_pow2(window * sample_rate)
    hop = max(1, int(round(nperseg * (1.0 - overlap))))
    return nperseg, hop


def spectrogram(series, sample_rate: float, window: float = 1.28, overlap: float = 0.95,
                window_fn: str = "hann", detrend: bool = True) -> Spectrogram:
    x = np.asarray(series, dtype=float).ravel()
    if sample_rate <= 0:
        raise ValueError("sample rate must be positive")
    nperseg, hop = spectrogram_params(sample_rate, window, overlap)
    if x.size < nperseg:
        raise ValueError(f"series of {x.size} samples is shorter than the {nperseg}-sample window")
    if detrend:
        x = x - x.mean()
    taper = scipy.signal.get_window(window_fn, nperseg, fftbins=True)
    frames = np.lib.stride_tricks.sliding_window_view(x, nperseg)[::hop]
    spec = np.fft.rfft(frames * taper, axis=1).T
    power = np.abs(spec) ** 2 / nperseg
    if nperseg % 2 == 0:
        power[1:-1] *= 2
    else:
        power[1:] *= 2
    with np.errstate(divide="ignore"):
        mag_db = np.maximum(20.0 * np.log10(np.abs(spec)), MAG_FLOOR_DB)
    times = (np.arange(frames.shape[0]) * hop + nperseg / 2) / sample_rate
    freqs = np.fft.rfftfreq(nperseg, d=1.0 / sample_rate)
    return Spectrogram(times, freqs, mag_db, power, float(window), float(overlap),
                       nperseg, hop, float(sample_rate))


@dataclass(frozen=True)
class EmpiricalCdf:
    values: np.ndarray

    def __call__(self, x):
        """Fraction of samples ``<= x`` (right-continuous)."""
        return np.searchsorted(self.values, x, side="right") / self.values.size

    def quantile(self, q):
        return np.quantile(self.values, q)

    def grid(self, n: int = 101) -> tuple[np.ndarray, np.ndarray]:
        """``(x, F(x))`` on ``n`` evenly spaced probability levels."""
        p = np.linspace(0.0, 1.0, n)
        return self.quantile(p), p

    def __len__(self):
        return self.values.size


def empirical_cdf(samples) -> EmpiricalCdf:
    v = np.sort(np.asarray(samples, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    if not np.all(np.isfinite(v)):
        raise ValueError("samples contain NaN or Inf")
    v.setflags(write=False)
    return EmpiricalCdf(v)


def dispersion(cdf: EmpiricalCdf | np.ndarray) -> float:
    """Interquartile range of the sample (same units as the samples, dB here)."""
    if not isinstance(cdf, EmpiricalCdf):
        cdf = empirical_cdf(cdf)
    if len(cdf) < 4:
        raise ValueError(f"dispersion needs at least 4 samples, got {len(cdf)}")
    q1, q3 = cdf.quantile([0.25, 0.75])
    return float(q3 - q1)


def high_band_energy_db(series, sample_rate: float, fraction: float = 0.5) -> float:
    """Energy above ``fraction`` of Nyquist in the periodogram of the de-meaned series, in dB."""
    x = np.asarray(series, dtype=float).ravel()
    x = x - x.mean()
    spec = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(x.size, d=1.0 / sample_rate)
    e = float(spec[freqs > fraction * sample_rate / 2].sum())
    return 10.0 * math.log10(max(e, 1e-300))
