"""Experiment configuration profiles and presets."""

from .experiment_config import SCALES, ExperimentConfig, GeometryConfig

__all__ = ['SCALES', 'ExperimentConfig', 'GeometryConfig']
