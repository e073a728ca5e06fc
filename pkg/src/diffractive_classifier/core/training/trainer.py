"""Mini-batch training and evaluation of network systems and ensembles."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import scipy.fft

from .config import TrainConfig
from .optimizer import TrainState
from ..architecture.ensemble import EnsembleSystem
from ..architecture.system import NetworkSystem
from ..detection.scores import ClassScores, predict
from ..exceptions import ConfigError, NumericError
from ..models.labeled_image import Dataset, ImageSet
from ..processors.encoding import EncodingSpec, encode_pixels

logger = logging.getLogger(__name__)

EVAL_BATCH_SIZE = 64

EpochCallback = Callable[[int, NetworkSystem, TrainState, List[Dict]], None]


def softmax_cross_entropy(scaled: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient with respect to ``scaled``.

    Args:
        scaled: Temperature-scaled scores, shape (B, M)
        labels: True classes, shape (B,)

    Returns:
        (mean loss, dLoss/dscaled of shape (B, M))
    """
    scaled = np.atleast_2d(np.asarray(scaled, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    batch = scaled.shape[0]
    shifted = scaled - scaled.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    total = exp.sum(axis=-1, keepdims=True)
    log_probs = shifted - np.log(total)
    rows = np.arange(batch)
    loss = float(-log_probs[rows, labels].mean())

    grad = exp / total
    grad[rows, labels] -= 1.0
    return loss, grad / batch


def loss(scores: ClassScores, labels: Union[int, np.ndarray]) -> float:
    """Softmax cross-entropy of the scaled scores, averaged over the batch."""
    return softmax_cross_entropy(scores.scaled, labels)[0]


def _batches(count: int, batch_size: int, order: Optional[np.ndarray] = None):
    order = np.arange(count) if order is None else order
    for start in range(0, count, batch_size):
        yield order[start:start + batch_size]


def train_epoch(system: NetworkSystem, split: ImageSet, config: TrainConfig,
                state: TrainState, encoding: EncodingSpec, seed: int = 0) -> TrainState:
    """Run one epoch of mini-batch Adam over a training split.

    The epoch index is ``state.epoch``; the sample order comes from
    ``default_rng([seed, epoch])`` and the learning rate and temperature
    from the config schedules. Parameters of ``system`` are updated in
    place and one history record is appended.

    Raises:
        ConfigError: If the split is empty
        NumericError: If a batch produces a non-finite loss (carries the batch index)
    """
    if len(split) == 0:
        raise ConfigError("cannot train on an empty split")
    epoch = state.epoch
    lr = config.learning_rate(epoch)
    temperature = config.temperature(epoch)
    order = np.random.default_rng([seed, epoch]).permutation(len(split))

    params = system.parameters()
    losses, correct = [], 0
    with scipy.fft.set_workers(config.workers):
        for batch_index, indices in enumerate(_batches(len(split), config.batch_size, order)):
            fields = encode_pixels(split.pixels[indices], encoding, system.grid_size, system.pitch)
            labels = split.labels[indices]
            system_pass = system.run(fields, temperature, capture=True,
                                     max_workers=config.network_workers)
            batch_loss, scaled_grad = softmax_cross_entropy(system_pass.scores.scaled, labels)
            if not np.isfinite(batch_loss):
                logger.error("Non-finite loss in epoch %d batch %d (samples %s)",
                             epoch, batch_index, indices.tolist())
                raise NumericError(
                    f"non-finite loss in epoch {epoch}, batch {batch_index}", batch_index=batch_index
                )
            grads = system.backward(system_pass, scaled_grad / temperature,
                                    max_workers=config.network_workers)
            state.optimizer.step(params, grads, lr)

            losses.append(batch_loss * len(indices))
            correct += int(np.sum(predict(system_pass.scores) == labels))
            logger.debug("epoch %d batch %d loss %.6f", epoch, batch_index, batch_loss)

    record = {
        'epoch': epoch,
        'split': 'train',
        'loss': float(np.sum(losses) / len(split)),
        'accuracy': correct / len(split),
        'lr': lr,
        'T': temperature,
    }
    state.history.append(record)
    state.lr = lr
    state.temperature = temperature
    state.epoch = epoch + 1
    return state


def collect_signals(model: Union[NetworkSystem, EnsembleSystem], split: ImageSet,
                    encoding: EncodingSpec, batch_size: int = EVAL_BATCH_SIZE,
                    max_workers: int = 1) -> List[np.ndarray]:
    """Per-plane detector signals for every image of a split, each (V, regions)."""
    reference = model.reference if isinstance(model, EnsembleSystem) else model
    chunks: List[List[np.ndarray]] = []
    for indices in _batches(len(split), batch_size):
        fields = encode_pixels(split.pixels[indices], encoding, reference.grid_size, reference.pitch)
        if isinstance(model, EnsembleSystem):
            chunks.append(model.detector_signals(fields, max_workers))
        else:
            chunks.append(model.run(fields, max_workers=max_workers).signals)
    return [np.concatenate([chunk[plane] for chunk in chunks], axis=0)
            for plane in range(len(chunks[0]))]


@dataclass
class EvaluationResult:
    """Accuracy and confusion counts of one model on one split."""

    accuracy: float
    correct: int
    total: int
    predictions: np.ndarray
    labels: np.ndarray
    confusion: pd.DataFrame
    loss: Optional[float] = None
    signals: List[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def per_class_accuracy(self) -> pd.Series:
        counts = self.confusion.sum(axis=1)
        hits = pd.Series(np.diag(self.confusion.values), index=self.confusion.index)
        return (hits / counts.replace(0, np.nan)).rename('accuracy')

    def summary(self) -> str:
        return f"accuracy {self.accuracy:.4f} ({self.correct}/{self.total})"


def confusion_matrix(labels: np.ndarray, predictions: np.ndarray, num_classes: int) -> pd.DataFrame:
    """Counts indexed by true class (rows) and predicted class (columns)."""
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (labels, predictions), 1)
    frame = pd.DataFrame(counts, index=pd.RangeIndex(num_classes, name='true'),
                         columns=pd.RangeIndex(num_classes, name='predicted'))
    return frame


def evaluate(model: Union[NetworkSystem, EnsembleSystem], split: ImageSet,
             encoding: EncodingSpec, temperature: Optional[float] = None,
             batch_size: int = EVAL_BATCH_SIZE, max_workers: int = 1) -> EvaluationResult:
    """Accuracy of a system or ensemble on a split.

    Predictions come from the raw scores only; ``temperature``, when given,
    is used solely to report the loss.

    Raises:
        ConfigError: If the split is empty
    """
    if len(split) == 0:
        raise ConfigError("cannot evaluate on an empty split")
    reference = model.reference if isinstance(model, EnsembleSystem) else model
    signals = collect_signals(model, split, encoding, batch_size, max_workers)
    scores = reference.scores_from_signals(signals, temperature or 1.0)
    predictions = predict(scores)
    labels = split.labels
    correct = int(np.sum(predictions == labels))
    eval_loss = loss(scores, labels) if temperature is not None else None
    return EvaluationResult(
        accuracy=correct / len(split),
        correct=correct,
        total=len(split),
        predictions=predictions,
        labels=labels,
        confusion=confusion_matrix(labels, predictions, reference.num_classes),
        loss=eval_loss,
        signals=signals,
    )


@dataclass
class FitResult:
    """Outcome of training one system for all configured epochs."""

    system: NetworkSystem
    state: TrainState
    best_epoch: int
    best_val_accuracy: float

    @property
    def history(self) -> pd.DataFrame:
        return pd.DataFrame(self.state.history)


def fit(system: NetworkSystem, dataset: Dataset, config: TrainConfig, encoding: EncodingSpec,
        seed: int = 0, on_epoch: Optional[EpochCallback] = None) -> FitResult:
    """Train for ``config.epochs`` epochs keeping the best validation checkpoint.

    ``system`` is trained in place; the returned system is a copy holding the
    parameters of the best validation epoch (the earliest on ties).
    """
    state = TrainState.create(config.beta1, config.beta2, config.epsilon)
    train_split, validation_split = dataset.train, dataset.validation
    for _ in range(config.epochs):
        train_epoch(system, train_split, config, state, encoding, seed)
        epoch = state.epoch - 1
        result = evaluate(system, validation_split, encoding, state.temperature,
                          max_workers=config.network_workers)
        record = {'epoch': epoch, 'split': 'validation', 'loss': result.loss,
                  'accuracy': result.accuracy, 'lr': state.lr, 'T': state.temperature}
        state.history.append(record)
        improved = state.record_best(epoch, result.accuracy, system.parameters())
        train_record = state.history[-2]
        logger.info("epoch %d: loss %.4f, train acc %.4f, val acc %.4f, lr %.3g, T %.3g%s",
                    epoch, train_record['loss'], train_record['accuracy'], result.accuracy,
                    state.lr, state.temperature, " (best)" if improved else "")
        if on_epoch is not None:
            on_epoch(epoch, system, state, state.history[-2:])

    best = system.copy()
    params = best.parameters()
    for name, value in state.best_parameters.items():
        params[name][...] = value
    return FitResult(best, state, state.best_epoch, state.best_val_accuracy)
