"""Scripted three-class event corpus built on the channel simulator.

Each series is the Dy slope tracker magnitude (dB) of one simulated stream:

* ``quiescent``: background drift only;
* ``impulse``: one abrupt rotation (fall-like);
* ``sustained``: a burst of continuous rotation (walk-like).

Event times and strengths are drawn per series so the classes are not
trivially template-matched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import simulator as sim
from .classify import LabeledSeries
from .pipeline import PipelineConfig, run_pipeline

CLASSES = ("quiescent", "impulse", "sustained")


@dataclass(frozen=True)
class CorpusConfig:
    per_class: int = 30
    duration: float = 2.0
    seed: int = 0
    base: sim.ChannelSimConfig = sim.ChannelSimConfig(volatility=0.01)
    pipeline: PipelineConfig = PipelineConfig(estimator="batch", window_len=25, overlap=0.8,
                                              variants=("slope",), slope_window=4)


def tracker_series(config: sim.ChannelSimConfig, n_frames: int, pipeline: PipelineConfig) -> np.ndarray:
    frames = (f for f, _ in sim.iter_stream(config, n_frames))
    res = run_pipeline(pipeline, frames, config.sample_rate)
    key = (pipeline.axes[0], pipeline.variants[0], pipeline.components[0])
    return np.array([s.magnitude_db for s in res.samples[key]])


def _event(label: str, rng: np.random.Generator, duration: float):
    t = rng.uniform(0.3, 0.6) * duration
    if label == "impulse":
        return sim.Event(t, "impulse-rotation", rng.uniform(np.pi / 3, np.pi / 2))
    if label == "sustained":
        return sim.Event(t, "sustained-rotation", rng.uniform(0.02, 0.04),
                         rng.uniform(0.15, 0.25) * duration)
    return None


def event_corpus(cfg: CorpusConfig | None = None) -> list[LabeledSeries]:
    """``per_class`` series per class, interleaved by class, fully determined by ``cfg.seed``."""
    cfg = cfg or CorpusConfig()
    rng = np.random.default_rng([cfg.seed, 7])
    n_frames = int(round(cfg.duration * cfg.base.sample_rate))
    update_rate = cfg.pipeline.update_rate(cfg.base.sample_rate)
    out = []
    for i in range(cfg.per_class):
        for label in CLASSES:
            ev = _event(label, rng, cfg.duration)
            stream_seed = int(rng.integers(0, 2**31 - 1))
            sim_cfg = replace(cfg.base, seed=stream_seed, events=() if ev is None else (ev,))
            series = tracker_series(sim_cfg, n_frames, cfg.pipeline)
            out.append(LabeledSeries(label, series, update_rate))
    return out
