"""Subspace tracking of MIMO channel state information streams."""

from .core import Axis, CsiFrame, DomainError, DomainTag, fold, to_domain, unfold
from .covariance import CovarianceEstimate, EstimatorConfig, estimate_stream, stationarity_to_window
from .eigen import EigenBasis, EigenError, eigendecompose
from .subspace import SubspacePartition, find_boundary, fractional_energy, normalized_mi, reconstruction_mse
from .tracker import TrackerState, UnitaritySample, Variant, pairwise, rate_of_change, slope
from .features import dispersion, empirical_cdf, spectrogram
from .simulator import ChannelSimConfig, Event, generate_stream
from .classify import DtwConfig, LabeledSeries, confusion_matrix, dtw_distance, knn_predict
from .pipeline import PipelineConfig, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "CsiFrame",
    "DomainError",
    "DomainTag",
    "fold",
    "to_domain",
    "unfold",
    "CovarianceEstimate",
    "EstimatorConfig",
    "estimate_stream",
    "stationarity_to_window",
    "EigenBasis",
    "EigenError",
    "eigendecompose",
    "SubspacePartition",
    "find_boundary",
    "fractional_energy",
    "normalized_mi",
    "reconstruction_mse",
    "TrackerState",
    "UnitaritySample",
    "Variant",
    "pairwise",
    "rate_of_change",
    "slope",
    "dispersion",
    "empirical_cdf",
    "spectrogram",
    "ChannelSimConfig",
    "Event",
    "generate_stream",
    "DtwConfig",
    "LabeledSeries",
    "confusion_matrix",
    "dtw_distance",
    "knn_predict",
    "PipelineConfig",
    "run_pipeline",
]
