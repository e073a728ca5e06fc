"""Incoherent ensembles of independently trained network systems.

Units project onto one common output plane; detector signals are the sums
of the per-unit intensities on each region, never of complex amplitudes.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .system import NetworkSystem
from ..detection.layout import check_layouts_match
from ..detection.scores import ClassScores, predict
from ..exceptions import ConfigError
from ..optics.field import ComplexField

logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 3


@dataclass
class EnsembleSystem:
    """Replicas of one architecture sharing a common detector layout.

    Attributes:
        units: Independently trained systems, summed in this order
        combination: Label of the checkpoint chosen for each unit, if selected
    """

    units: List[NetworkSystem]
    combination: Optional[List[str]] = None

    def __post_init__(self):
        if not self.units:
            raise ConfigError("an ensemble needs at least one unit")
        first = self.units[0]
        for index, unit in enumerate(self.units[1:], start=1):
            if unit.spec.render() != first.spec.render() or unit.num_classes != first.num_classes:
                raise ConfigError(
                    f"ensemble unit {index} is {unit.spec.render()}, expected {first.spec.render()}"
                )
            if not check_layouts_match(unit.layouts, first.layouts):
                raise ConfigError(f"ensemble unit {index} uses a different detector layout")
        if any(unit.coefficients is not None for unit in self.units):
            raise ConfigError("ensembles of learnable-coefficient units are not supported")

    def __repr__(self) -> str:
        return f"EnsembleSystem({self.units[0].spec.render()} x {len(self.units)})"

    @property
    def reference(self) -> NetworkSystem:
        return self.units[0]

    @property
    def num_classes(self) -> int:
        return self.reference.num_classes

    def detector_signals(self, input_field: ComplexField, max_workers: int = 1) -> List[np.ndarray]:
        """Per-plane detector signals summed over units in unit order."""
        return sum_unit_signals([unit.run(input_field, max_workers=max_workers).signals
                                 for unit in self.units])

    def output_intensity(self, input_field: ComplexField) -> List[np.ndarray]:
        """Per-plane output intensity summed over units (for rendering)."""
        totals = None
        for unit in self.units:
            intensities = unit.output_intensities(input_field)
            if totals is None:
                totals = [intensity.copy() for intensity in intensities]
            else:
                for total, intensity in zip(totals, intensities):
                    total += intensity
        return totals


def sum_unit_signals(per_unit: Sequence[Sequence[np.ndarray]]) -> List[np.ndarray]:
    """Add per-unit detector signals plane by plane, in unit order."""
    totals = [np.array(signals, dtype=np.float64, copy=True) for signals in per_unit[0]]
    for signals in per_unit[1:]:
        for total, unit_signals in zip(totals, signals):
            total += unit_signals
    return totals


def ensemble_forward(ensemble: EnsembleSystem, input_field: ComplexField,
                     temperature: float = 1.0, max_workers: int = 1) -> ClassScores:
    """Class scores from the incoherent sum of every unit's detector signals."""
    signals = ensemble.detector_signals(input_field, max_workers)
    return ensemble.reference.scores_from_signals(signals, temperature)


@dataclass
class EnsembleCandidate:
    """One saved checkpoint of one ensemble unit.

    Attributes:
        label: Identifier of the checkpoint (e.g. its epoch)
        system: The unit's system at that checkpoint
        signals: Cached per-plane validation detector signals, each (V, regions)
        solo_accuracy: Validation accuracy of the checkpoint on its own
    """

    label: str
    system: NetworkSystem
    signals: List[np.ndarray]
    solo_accuracy: Optional[float] = None


@dataclass
class EnsembleSelection:
    ensemble: EnsembleSystem
    combination: Tuple[str, ...]
    accuracy: float
    combinations_evaluated: int
    retained: List[List[str]] = field(default_factory=list)


def _accuracy(reference: NetworkSystem, signals: Sequence[np.ndarray], labels: np.ndarray) -> float:
    predictions = predict(reference.scores_from_signals(signals))
    return float(np.mean(predictions == labels))


def select_ensemble(candidates: Sequence[Sequence[EnsembleCandidate]], labels: np.ndarray,
                    top_k: int = DEFAULT_TOP_K) -> EnsembleSelection:
    """Choose one checkpoint per unit maximising ensemble validation accuracy.

    Each unit keeps its ``top_k`` checkpoints by solo validation accuracy
    (earlier candidates win ties); every combination of the retained
    checkpoints is then scored and the first best combination is returned.

    Args:
        candidates: For each unit, its checkpoints with cached validation signals
        labels: Validation labels, shape (V,)
        top_k: Checkpoints retained per unit

    Raises:
        ConfigError: If there are no candidates or top_k < 1
    """
    if not candidates or any(len(unit) == 0 for unit in candidates):
        raise ConfigError("ensemble selection needs at least one checkpoint for every unit")
    if top_k < 1:
        raise ConfigError(f"top_k must be at least 1, got {top_k}")
    labels = np.asarray(labels)

    retained: List[List[EnsembleCandidate]] = []
    for unit in candidates:
        for candidate in unit:
            if candidate.solo_accuracy is None:
                candidate.solo_accuracy = _accuracy(candidate.system, candidate.signals, labels)
        ranked = sorted(enumerate(unit), key=lambda item: (-item[1].solo_accuracy, item[0]))
        retained.append([candidate for _, candidate in ranked[:top_k]])

    reference = retained[0][0].system
    best: Optional[Tuple[float, Tuple[EnsembleCandidate, ...]]] = None
    evaluated = 0
    for combination in itertools.product(*retained):
        summed = sum_unit_signals([candidate.signals for candidate in combination])
        accuracy = _accuracy(reference, summed, labels)
        evaluated += 1
        logger.debug("Combination %s: validation accuracy %.4f",
                     [candidate.label for candidate in combination], accuracy)
        if best is None or accuracy > best[0]:
            best = (accuracy, combination)

    accuracy, chosen = best
    labels_chosen = tuple(candidate.label for candidate in chosen)
    logger.info("Selected ensemble %s with validation accuracy %.4f (%d combinations)",
                list(labels_chosen), accuracy, evaluated)
    ensemble = EnsembleSystem([candidate.system for candidate in chosen], list(labels_chosen))
    return EnsembleSelection(ensemble, labels_chosen, accuracy, evaluated,
                             [[candidate.label for candidate in unit] for unit in retained])
