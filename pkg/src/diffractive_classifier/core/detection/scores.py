"""Class scores from detector signals, with their analytic derivatives.

All functions accept signal arrays of shape (..., M); the trailing axis is
the class axis. Backward functions take dLoss/draw and return gradients with
respect to their signal inputs.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError, NumericError


@dataclass
class ClassScores:
    """Per-class scores.

    Attributes:
        raw: Normalized signal per class
        temperature: Training-time divisor T
        scaled: raw / T
    """

    raw: np.ndarray
    temperature: float = 1.0
    scaled: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.temperature > 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")
        self.raw = np.asarray(self.raw, dtype=np.float64)
        self.scaled = self.raw / self.temperature

    @property
    def num_classes(self) -> int:
        return self.raw.shape[-1]

    def with_temperature(self, temperature: float) -> 'ClassScores':
        return ClassScores(self.raw, temperature)


@dataclass
class DetectorCoefficients:
    """Per-class weights p_m and n_m of the positive and negative signals."""

    p: np.ndarray
    n: np.ndarray
    learnable: bool = False

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64)
        self.n = np.asarray(self.n, dtype=np.float64)
        if self.p.shape != self.n.shape or self.p.ndim != 1:
            raise ConfigError(
                f"coefficient vectors must be 1D and equal length, got {self.p.shape} and {self.n.shape}"
            )

    @property
    def num_classes(self) -> int:
        return self.p.shape[0]

    def parameters(self) -> Dict[str, np.ndarray]:
        """Trainable arrays (empty when the coefficients are fixed)."""
        if not self.learnable:
            return {}
        return {'coefficients.p': self.p, 'coefficients.n': self.n}

    def ratios(self) -> np.ndarray:
        with np.errstate(divide='ignore', invalid='ignore'):
            return self.p / self.n

    @classmethod
    def balanced(cls, num_classes: int, learnable: bool = False) -> 'DetectorCoefficients':
        return cls(np.ones(num_classes), np.ones(num_classes), learnable)

    @classmethod
    def random(cls, num_classes: int, rng: np.random.Generator,
               low: float = 0.5, high: float = 1.5) -> 'DetectorCoefficients':
        """Learnable coefficients drawn uniformly from [low, high]."""
        return cls(rng.uniform(low, high, num_classes), rng.uniform(low, high, num_classes), True)


def _check_signals(*arrays: np.ndarray) -> None:
    for values in arrays:
        if not np.all(np.isfinite(values)):
            raise NumericError("detector signals contain non-finite values")


def _safe_total(signals_pos: np.ndarray, signals_neg: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    total = signals_pos + signals_neg
    degenerate = total == 0
    return np.where(degenerate, 1.0, total), degenerate


def differential_scores(signals_pos: np.ndarray, signals_neg: np.ndarray,
                        temperature: float = 1.0) -> ClassScores:
    """Normalized difference (I+ - I-) / (I+ + I-) per class.

    Classes whose two signals are both zero score 0.
    """
    signals_pos = np.asarray(signals_pos, dtype=np.float64)
    signals_neg = np.asarray(signals_neg, dtype=np.float64)
    _check_signals(signals_pos, signals_neg)
    total, degenerate = _safe_total(signals_pos, signals_neg)
    raw = np.where(degenerate, 0.0, (signals_pos - signals_neg) / total)
    return ClassScores(raw, temperature)


def differential_backward(signals_pos: np.ndarray, signals_neg: np.ndarray,
                          raw_gradient: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    total, degenerate = _safe_total(signals_pos, signals_neg)
    scale = np.where(degenerate, 0.0, 2.0 * raw_gradient / total ** 2)
    return scale * signals_neg, -scale * signals_pos


def nondifferential_scores(signals: np.ndarray, temperature: float = 1.0) -> ClassScores:
    """I_m / max(I). All-zero signals give the uniform score 1/M."""
    signals = np.asarray(signals, dtype=np.float64)
    _check_signals(signals)
    peak = signals.max(axis=-1, keepdims=True)
    degenerate = peak == 0
    num_classes = signals.shape[-1]
    raw = np.where(degenerate, 1.0 / num_classes, signals / np.where(degenerate, 1.0, peak))
    return ClassScores(raw, temperature)


def nondifferential_backward(signals: np.ndarray, raw_gradient: np.ndarray) -> np.ndarray:
    """Gradient of I_m / max(I); the max is taken at its first occurrence."""
    signals = np.asarray(signals, dtype=np.float64)
    winner = np.argmax(signals, axis=-1)[..., None]
    peak = np.take_along_axis(signals, winner, axis=-1)
    degenerate = peak == 0
    peak = np.where(degenerate, 1.0, peak)

    grad = raw_gradient / peak
    through_peak = -(raw_gradient * signals).sum(axis=-1, keepdims=True) / peak ** 2
    current = np.take_along_axis(grad, winner, axis=-1)
    np.put_along_axis(grad, winner, current + through_peak, axis=-1)
    return np.where(degenerate, 0.0, grad)


def generalized_scores(signals_pos: np.ndarray, signals_neg: np.ndarray,
                       coefficients: DetectorCoefficients,
                       temperature: float = 1.0) -> ClassScores:
    """(p_m I+ - n_m I-) / (I+ + I-) per class.

    With p = n = 1 this is exactly :func:`differential_scores`.
    """
    signals_pos = np.asarray(signals_pos, dtype=np.float64)
    signals_neg = np.asarray(signals_neg, dtype=np.float64)
    _check_signals(signals_pos, signals_neg)
    if coefficients.num_classes != signals_pos.shape[-1]:
        raise ConfigError(
            f"{coefficients.num_classes} coefficient pairs for {signals_pos.shape[-1]} classes"
        )
    total, degenerate = _safe_total(signals_pos, signals_neg)
    numerator = coefficients.p * signals_pos - coefficients.n * signals_neg
    raw = np.where(degenerate, 0.0, numerator / total)
    return ClassScores(raw, temperature)


def generalized_backward(signals_pos: np.ndarray, signals_neg: np.ndarray,
                         coefficients: DetectorCoefficients, raw_gradient: np.ndarray
                         ) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray], Optional[np.ndarray]]:
    """Gradients for the signals and, when learnable, the coefficients.

    Coefficient gradients are summed over any batch axes.
    """
    total, degenerate = _safe_total(signals_pos, signals_neg)
    weight = coefficients.p + coefficients.n
    scale = np.where(degenerate, 0.0, raw_gradient / total ** 2)
    grad_pos = scale * weight * signals_neg
    grad_neg = -scale * weight * signals_pos
    if not coefficients.learnable:
        return grad_pos, grad_neg, None, None

    per_total = np.where(degenerate, 0.0, raw_gradient / total)
    batch_axes = tuple(range(per_total.ndim - 1))
    grad_p = (per_total * signals_pos).sum(axis=batch_axes)
    grad_n = -(per_total * signals_neg).sum(axis=batch_axes)
    return grad_pos, grad_neg, grad_p, grad_n


def predict(scores: ClassScores) -> np.ndarray:
    """Index of the largest raw score; ties resolve to the lowest class id."""
    return np.argmax(scores.raw, axis=-1)
