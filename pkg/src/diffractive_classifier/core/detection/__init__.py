"""Detector placement, detector signals and class scores."""

from .layout import (
    DetectorRegion,
    DetectorLayout,
    DEFAULT_DETECTOR_WIDTH,
    read_detector,
    grid_layout,
    differential_layout,
)
from .scores import (
    ClassScores,
    DetectorCoefficients,
    differential_scores,
    nondifferential_scores,
    generalized_scores,
    predict,
)

__all__ = [
    'DetectorRegion',
    'DetectorLayout',
    'DEFAULT_DETECTOR_WIDTH',
    'read_detector',
    'grid_layout',
    'differential_layout',
    'ClassScores',
    'DetectorCoefficients',
    'differential_scores',
    'nondifferential_scores',
    'generalized_scores',
    'predict',
]
