"""Architecture notation, network systems and incoherent ensembles."""

from .notation import ArchitectureSpec, parse_notation, render
from .system import NetworkSystem, SystemPass, default_layouts, instantiate, system_forward
from .ensemble import (
    EnsembleSystem,
    EnsembleCandidate,
    EnsembleSelection,
    ensemble_forward,
    select_ensemble,
)

__all__ = [
    'ArchitectureSpec',
    'parse_notation',
    'render',
    'NetworkSystem',
    'SystemPass',
    'default_layouts',
    'instantiate',
    'system_forward',
    'EnsembleSystem',
    'EnsembleCandidate',
    'EnsembleSelection',
    'ensemble_forward',
    'select_ensemble',
]
