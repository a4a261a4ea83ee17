"""DTW distance and k-nearest-neighbour classification of 1-D tracker series.

Corpus files are plain text, one labelled series per file::

    # label=impulse
    # sample_rate=100.0
    -0.0123
    -0.0410
    ...

Header lines start with ``#`` and hold ``key=value`` pairs; every other
non-blank line is one sample.  Files are read in sorted name order.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

CORPUS_SUFFIX = ".series"


@dataclass(frozen=True)
class LabeledSeries:
    label: str
    series: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.series, dtype=float).ravel()
        if x.size == 0:
            raise ValueError(f"series for label {self.label!r} is empty")
        if not np.all(np.isfinite(x)):
            raise ValueError(f"series for label {self.label!r} contains NaN or Inf")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        x.setflags(write=False)
        object.__setattr__(self, "series", x)
        object.__setattr__(self, "label", str(self.label))


@dataclass(frozen=True)
class DtwConfig:
    """``band_radius`` is the Sakoe-Chiba half-width as a fraction of the longer series."""

    band_radius: float = 0.1
    k: int = 3
    normalize: bool = True

    def __post_init__(self):
        if not 0.0 < self.band_radius <= 1.0:
            raise ValueError(f"band_radius must lie in (0, 1], got {self.band_radius}")
        if int(self.k) != self.k or self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {self.k}")


class BandError(ValueError):
    """The warping band cannot connect the two endpoints."""


def band_width(n: int, m: int, band_radius: float) -> int:
    return int(math.ceil(band_radius * max(n, m)))


def dtw_distance(a, b, cfg: DtwConfig | None = None) -> float:
    """Band-constrained DTW with ``|a_i - b_j|`` local cost.

    Cells with ``|i - j| > r`` are excluded, ``r = ceil(band_radius * max(n, m))``.
    Each row of the cumulative table is filled in one pass: with
    ``m_j = min(D[i-1, j-1], D[i-1, j])`` the recursion
    ``D[i, j] = c_j + min(m_j, D[i, j-1])`` unrolls to
    ``D[i, j] = C_j + min_{k <= j}(m_k - C_{k-1})`` over prefix sums ``C``.
    """
    cfg = cfg or DtwConfig()
    x = np.asarray(a, dtype=float).ravel()
    y = np.asarray(b, dtype=float).ravel()
    n, m = x.size, y.size
    if n == 0 or m == 0:
        raise ValueError("DTW needs two non-empty series")
    r = band_width(n, m, cfg.band_radius)
    if abs(n - m) > r:
        raise BandError(f"band of radius {r} cannot align lengths {n} and {m}")
    prev = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        lo, hi = max(1, i - r), min(m, i + r)
        cost = np.abs(x[i - 1] - y[lo - 1:hi])
        diag_up = np.minimum(prev[lo - 1:hi], prev[lo:hi + 1])
        csum = np.cumsum(cost)
        shifted = np.concatenate([[0.0], csum[:-1]])
        row = csum + np.minimum.accumulate(diag_up - shifted)
        cur = np.full(m + 1, np.inf)
        cur[lo:hi + 1] = row
        prev = cur
    return float(prev[m])


def _prepared(series: np.ndarray, cfg: DtwConfig) -> np.ndarray:
    return series - np.median(series) if cfg.normalize else series


def distance_matrix(items: Sequence[LabeledSeries], cfg: DtwConfig | None = None) -> np.ndarray:
    """Symmetric matrix of pairwise DTW distances."""
    cfg = cfg or DtwConfig()
    xs = [_prepared(s.series, cfg) for s in items]
    n = len(xs)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = dtw_distance(xs[i], xs[j], cfg)
    return D


def _vote(labels: Sequence[str], dists: np.ndarray, k: int) -> tuple[str, float]:
    if k > len(labels):
        raise ValueError(f"k={k} exceeds the {len(labels)} training series")
    order = np.argsort(dists, kind="stable")[:k]
    near = [labels[i] for i in order]
    counts = Counter(near)
    top = max(counts.values())
    tied = [lab for lab in counts if counts[lab] == top]
    mean = {lab: float(np.mean([dists[i] for i in order if labels[i] == lab])) for lab in tied}
    label = min(tied, key=lambda lab: (mean[lab], lab))
    return label, mean[label]


def knn_predict(query, train: Sequence[LabeledSeries], cfg: DtwConfig | None = None) -> tuple[str, float]:
    """Majority label among the ``k`` nearest training series.

    Returns ``(label, score)`` where ``score`` is the mean distance to the
    winning neighbours; ties in the vote go to the smaller mean distance.
    """
    cfg = cfg or DtwConfig()
    if not train:
        raise ValueError("training set is empty")
    q = _prepared(np.asarray(getattr(query, "series", query), dtype=float).ravel(), cfg)
    dists = np.array([dtw_distance(q, _prepared(t.series, cfg), cfg) for t in train])
    return _vote([t.label for t in train], dists, cfg.k)


def leave_one_out(items: Sequence[LabeledSeries], cfg: DtwConfig | None = None,
                  distances: np.ndarray | None = None) -> list[str]:
    """Predict each series from all the others; reuses ``distances`` if given."""
    cfg = cfg or DtwConfig()
    D = distance_matrix(items, cfg) if distances is None else np.asarray(distances)
    labels = [s.label for s in items]
    preds = []
    for i in range(len(items)):
        keep = np.arange(len(items)) != i
        preds.append(_vote([lab for lab, k in zip(labels, keep) if k], D[i, keep], cfg.k)[0])
    return preds


def confusion_matrix(predictions: Sequence[str], truths: Sequence[str],
                     labels: Sequence[str] | None = None) -> tuple[list[str], np.ndarray]:
    """Row-normalised confusion rates; row = true label, column = predicted."""
    if len(predictions) != len(truths):
        raise ValueError(f"{len(predictions)} predictions for {len(truths)} truths")
    if labels is None:
        labels = sorted(set(truths))
    labels = list(labels)
    unknown = (set(predictions) | set(truths)) - set(labels)
    if unknown:
        raise ValueError(f"labels outside the label set: {sorted(unknown)}")
    idx = {lab: i for i, lab in enumerate(labels)}
    M = np.zeros((len(labels), len(labels)))
    for p, t in zip(predictions, truths):
        M[idx[t], idx[p]] += 1
    rows = M.sum(axis=1, keepdims=True)
    return labels, np.divide(M, rows, out=np.zeros_like(M), where=rows > 0)


def accuracy(predictions: Sequence[str], truths: Sequence[str]) -> float:
    return float(np.mean([p == t for p, t in zip(predictions, truths)]))


def confusion_csv(labels: Sequence[str], matrix: np.ndarray) -> str:
    lines = ["true\\predicted," + ",".join(labels)]
    for lab, row in zip(labels, matrix):
        lines.append(lab + "," + ",".join(f"{v:.6f}" for v in row))
    return "\n".join(lines) + "\n"


def format_series(item: LabeledSeries) -> str:
    head = f"# label={item.label}\n# sample_rate={item.sample_rate!r}\n"
    return head + "".join(f"{v!r}\n" for v in item.series.tolist())


def parse_series(text: str, source: str = "<text>") -> LabeledSeries:
    meta, values = {}, []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition("=")
            if sep:
                meta[key.strip()] = val.strip()
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ValueError(f"{source}:{n}: not a number: {line!r}") from None
    if "label" not in meta:
        raise ValueError(f"{source}: missing '# label=' header")
    return LabeledSeries(meta["label"], np.array(values), float(meta.get("sample_rate", 1.0)))


def write_corpus(directory: str | os.PathLike, items: Sequence[LabeledSeries]) -> list[Path]:
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, item in enumerate(items):
        p = root / f"{i:04d}_{item.label}{CORPUS_SUFFIX}"
        p.write_text(format_series(item))
        paths.append(p)
    return paths


def read_corpus(directory: str | os.PathLike) -> list[LabeledSeries]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory {root} does not exist")
    files = sorted(root.glob(f"*{CORPUS_SUFFIX}"))
    if not files:
        raise ValueError(f"no *{CORPUS_SUFFIX} files in {root}")
    return [parse_series(p.read_text(), str(p)) for p in files]
