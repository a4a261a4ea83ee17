"""End-to-end flow: frames -> covariance -> eigenbasis -> boundary and trackers.

All axes are processed in a single pass over the frame stream, so memory for
frames stays at one stationarity window per axis.  Derived series (one value
per covariance update) are kept for the spectrogram and CDF outputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable


from . import features, tracker
from .core import Axis, CsiFrame
from .covariance import EstimatorConfig, StreamingEstimator, stationarity_to_window
from .eigen import eigendecompose
from .subspace import find_boundary

SCHEMA_VERSION = "1.0"
OUTPUT_KINDS = ("track", "boundary", "spectrogram", "cdf")


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for one pipeline run.

    ``window_len`` overrides the frame count derived from ``stationarity``
    (seconds).  The first entry of ``targets_db`` sets the boundary reported
    next to every tracker sample.
    """

    axes: tuple[str, ...] = ("dy",)
    estimator: str = "batch"
    stationarity: float = 0.025
    window_len: int | None = None
    overlap: float = 0.95
    forgetting: float = 0.99
    targets_db: tuple[float, ...] = (-12.0,)
    variants: tuple[str, ...] = ("pairwise",)
    components: tuple[int, ...] = (1,)
    slope_window: int = 4
    spectrogram_window: float = 1.28
    spectrogram_overlap: float = 0.95
    outputs: tuple[str, ...] = ("track",)

    def __post_init__(self):
        for name in ("axes", "targets_db", "variants", "components", "outputs"):
            val = getattr(self, name)
            if isinstance(val, (str, int, float)):
                val = (val,)
            object.__setattr__(self, name, tuple(val))
        axes = tuple(Axis.parse(a).name.lower() for a in self.axes)
        if not axes or len(set(axes)) != len(axes):
            raise ValueError(f"axes must be a non-empty list without repeats, got {self.axes}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "variants", tuple(tracker.Variant.parse(v).value for v in self.variants))
        object.__setattr__(self, "targets_db", tuple(float(t) for t in self.targets_db))
        object.__setattr__(self, "components", tuple(int(c) for c in self.components))
        if not self.targets_db or any(t >= 0 for t in self.targets_db):
            raise ValueError(f"boundary targets must be negative dB, got {self.targets_db}")
        if not self.components or min(self.components) < 0:
            raise ValueError(f"components must be non-negative indices, got {self.components}")
        if not self.variants:
            raise ValueError("at least one tracker variant is required")
        if self.slope_window < 2:
            raise ValueError("slope_window must be >= 2")
        bad = set(self.outputs) - set(OUTPUT_KINDS)
        if bad:
            raise ValueError(f"unknown outputs {sorted(bad)}; choose from {OUTPUT_KINDS}")
        if self.stationarity <= 0:
            raise ValueError("stationarity period must be positive")
        if self.window_len is not None and self.window_len < 1:
            raise ValueError("window_len must be >= 1")
        # estimator settings are checked here as well as at run time
        EstimatorConfig(self.estimator, self.window_len or 1, self.forgetting, self.overlap)
        if not 0.0 <= self.spectrogram_overlap < 1.0 or self.spectrogram_window <= 0:
            raise ValueError("spectrogram window must be positive and overlap in [0, 1)")

    def estimator_config(self, sample_rate: float) -> EstimatorConfig:
        if self.window_len is not None:
            L = int(self.window_len)
        else:
            L = stationarity_to_window(self.stationarity, sample_rate, self.overlap).window_len
        return EstimatorConfig(self.estimator, L, self.forgetting, self.overlap)

    def update_rate(self, sample_rate: float) -> float:
        return sample_rate / self.estimator_config(sample_rate).hop

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown pipeline config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        return cls.from_dict(json.loads(text))


def activity_preset(**overrides) -> PipelineConfig:
    """25 ms stationarity, 95% overlap, forgetting 0.99, slope tracking on Dy."""
    base = dict(axes=("dy",), estimator="stochastic", stationarity=0.025, overlap=0.95,
                forgetting=0.99, variants=("pairwise", "slope"), components=(1,))
    base.update(overrides)
    return PipelineConfig(**base)


SeriesKey = tuple  # (axis, variant, component)


@dataclass
class PipelineResult:
    config: PipelineConfig
    sample_rate: float
    update_rate: float
    dims: tuple[int, int, int] | None = None
    frame_count: int = 0
    samples: dict = field(default_factory=dict)       # SeriesKey -> list[UnitaritySample]
    boundaries: list = field(default_factory=list)    # (timestamp, axis, SubspacePartition)

    def series_keys(self) -> list:
        return sorted(self.samples, key=lambda k: (Axis.parse(k[0]), k[1], k[2]))

    def metadata(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "config": self.config.to_dict(),
                "sample_rate": self.sample_rate, "update_rate": self.update_rate,
                "dims": list(self.dims) if self.dims else None, "frames": self.frame_count,
                "window_len": self.config.estimator_config(self.sample_rate).window_len}


def run_pipeline(config: PipelineConfig, frames: Iterable[CsiFrame], sample_rate: float) -> PipelineResult:
    """Process a frame stream in one pass."""
    if sample_rate <= 0:
        raise ValueError("sample rate must be positive")
    est_cfg = config.estimator_config(sample_rate)
    result = PipelineResult(config, float(sample_rate), sample_rate / est_cfg.hop)
    estimators = {a: StreamingEstimator(a, est_cfg) for a in config.axes}
    trackers = {}
    for a in config.axes:
        for v in config.variants:
            trackers[(a, v)] = tracker.TrackerState(axis=a, components=config.components, variant=v,
                                                    window=config.slope_window)
            for c in config.components:
                result.samples[(a, v, c)] = []
    for n, frame in enumerate(frames):
        if result.dims is None:
            result.dims = frame.shape
            for a in config.axes:
                d = frame.shape[int(Axis.parse(a))]
                if max(config.components) >= d:
                    raise ValueError(f"tracked component {max(config.components)} does not exist "
                                     f"on axis {a} of dimension {d}")
        elif frame.shape != result.dims:
            raise ValueError(f"frame {n} has shape {frame.shape}, stream shape is {result.dims}")
        result.frame_count += 1
        for a, est in estimators.items():
            cov = est.push(frame)
            if cov is None:
                continue
            basis = eigendecompose(cov)
            for t in config.targets_db:
                result.boundaries.append((cov.timestamp, a, find_boundary(basis, t)))
            for v in config.variants:
                for s in tracker.update(trackers[(a, v)], basis, cov.timestamp):
                    result.samples[(a, v, s.component)].append(s)
    if result.frame_count == 0:
        raise ValueError("input stream holds no frames")
    return result


# ---------------------------------------------------------------- text output

def _f(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def track_rows(result: PipelineResult) -> list[list[str]]:
    primary = result.config.targets_db[0]
    part = {(t, a): p for t, a, p in result.boundaries if p.target_mse_db == primary}
    rows = []
    for key in result.series_keys():
        samples = result.samples[key]
        rate = [math.nan] * len(samples)
        if len(samples) >= 2:
            rate[1:] = tracker.rate_of_change(samples).tolist()
        for s, r in zip(samples, rate):
            p = part[(s.timestamp, key[0])]
            rows.append([_f(s.timestamp), key[0], key[1], str(s.component), _f(p.boundary),
                         _f(p.e_s), _f(s.value.real), _f(s.value.imag), _f(s.magnitude_db),
                         _f(r), str(int(s.crossing))])
    rows.sort(key=lambda r: (float(r[0]), Axis.parse(r[1]), r[2], int(r[3])))
    return rows


def _csv(header: list[str], rows: list[list[str]]) -> str:
    return ",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows)


def track_csv(result: PipelineResult) -> str:
    return _csv(SCHEMA["track"]["columns_order"], track_rows(result))


def boundary_csv(result: PipelineResult) -> str:
    rows = [[_f(t), a, _f(p.target_mse_db), _f(p.boundary), _f(p.e_s), str(int(p.saturated))]
            for t, a, p in result.boundaries]
    return _csv(SCHEMA["boundary"]["columns_order"], rows)


def series_spectrogram(result: PipelineResult, key) -> features.Spectrogram:
    cfg = result.config
    mags = tracker.magnitudes_db(result.samples[key])
    return features.spectrogram(mags, result.update_rate, cfg.spectrogram_window, cfg.spectrogram_overlap)


def spectrogram_csv(result: PipelineResult, keys=None) -> str:
    rows = []
    for key in keys or result.series_keys():
        sg = series_spectrogram(result, key)
        for j, t in enumerate(sg.times):
            for i, f in enumerate(sg.frequencies):
                rows.append([key[0], key[1], str(key[2]), _f(t), _f(f), _f(sg.magnitude_db[i, j])])
    return _csv(SCHEMA["spectrogram"]["columns_order"], rows)


def cdf_csv(result: PipelineResult, n: int = 101) -> str:
    rows = []
    for key in result.series_keys():
        mags = tracker.magnitudes_db(result.samples[key])
        if mags.size == 0:
            continue
        cdf = features.empirical_cdf(mags)
        iqr = features.dispersion(cdf) if len(cdf) >= 4 else math.nan
        x, p = cdf.grid(n)
        for xv, pv in zip(x, p):
            rows.append([key[0], key[1], str(key[2]), _f(pv), _f(xv), _f(iqr)])
    return _csv(SCHEMA["cdf"]["columns_order"], rows)


WRITERS = {"track": track_csv, "boundary": boundary_csv,
           "spectrogram": spectrogram_csv, "cdf": cdf_csv}


def render(result: PipelineResult) -> dict[str, str]:
    """CSV text for every output selected in the config."""
    return {kind: WRITERS[kind](result) for kind in result.config.outputs}


def load_schema() -> dict:
    from importlib.resources import files
    schema = json.loads(files(__package__).joinpath("schema.json").read_text())
    for out in schema["outputs"].values():
        out["columns_order"] = [c["name"] for c in out["columns"]]
    return schema["outputs"] | {"version": schema["version"]}


SCHEMA = load_schema()
