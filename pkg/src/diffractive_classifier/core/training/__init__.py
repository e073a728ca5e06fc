"""Loss, optimiser, schedules and the training/evaluation loops."""

from .config import TrainConfig
from .optimizer import Adam, TrainState
from .trainer import (
    EvaluationResult,
    FitResult,
    collect_signals,
    evaluate,
    fit,
    loss,
    softmax_cross_entropy,
    train_epoch,
)
from .experiment import ExperimentReport, RepetitionResult, run_experiment

__all__ = [
    'TrainConfig',
    'Adam',
    'TrainState',
    'EvaluationResult',
    'FitResult',
    'collect_signals',
    'evaluate',
    'fit',
    'loss',
    'softmax_cross_entropy',
    'train_epoch',
    'ExperimentReport',
    'RepetitionResult',
    'run_experiment',
]
