"""Coherent scalar-wave forward model: fields, propagation and networks."""

from .field import (
    ComplexField,
    PhaseLayer,
    PropagationGeometry,
    DEFAULT_PITCH,
    DEFAULT_LAYER_SPACING,
)
from .propagation import (
    propagate,
    adjoint_propagate,
    propagate_direct,
    propagate_values,
    transfer_function,
    band_power,
)
from .network import DiffractiveNetwork, CapturedStages, modulate, forward, adjoint_backward

__all__ = [
    'ComplexField',
    'PhaseLayer',
    'PropagationGeometry',
    'DEFAULT_PITCH',
    'DEFAULT_LAYER_SPACING',
    'propagate',
    'adjoint_propagate',
    'propagate_direct',
    'propagate_values',
    'transfer_function',
    'band_power',
    'DiffractiveNetwork',
    'CapturedStages',
    'modulate',
    'forward',
    'adjoint_backward',
]
