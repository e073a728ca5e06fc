"""Repeated training runs of one architecture and their summary."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .config import TrainConfig
from .trainer import EpochCallback, FitResult, evaluate, fit
from ..architecture.notation import ArchitectureSpec, parse_notation
from ..architecture.system import NetworkSystem, instantiate
from ..models.labeled_image import Dataset
from ..processors.encoding import EncodingSpec

logger = logging.getLogger(__name__)

SystemBuilder = Callable[[ArchitectureSpec, int], NetworkSystem]


@dataclass
class RepetitionResult:
    """One independently seeded training run."""

    seed: int
    best_epoch: int
    val_accuracy: float
    test_accuracy: float
    fit: FitResult = field(repr=False, default=None)


@dataclass
class ExperimentReport:
    """Test accuracy over repetitions of one architecture on one dataset."""

    notation: str
    dataset_id: str
    repetitions: List[RepetitionResult]

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([rep.test_accuracy for rep in self.repetitions])

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        """Sample standard deviation (n-1); 0 for a single repetition."""
        if len(self.repetitions) < 2:
            return 0.0
        return float(np.std(self.accuracies, ddof=1))

    @property
    def single_run(self) -> bool:
        return len(self.repetitions) < 2

    def format_accuracy(self) -> str:
        text = f"{100 * self.mean:.2f} ± {100 * self.std:.2f}"
        return f"{text} (n=1)" if self.single_run else text

    def to_row(self) -> Dict:
        return {
            'architecture': self.notation,
            'dataset': self.dataset_id,
            'mean': self.mean,
            'std': self.std,
            'n': len(self.repetitions),
            'single_run': self.single_run,
            'accuracy': self.format_accuracy(),
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{
            'seed': rep.seed,
            'best_epoch': rep.best_epoch,
            'val_accuracy': rep.val_accuracy,
            'test_accuracy': rep.test_accuracy,
        } for rep in self.repetitions])


def run_experiment(notation: Union[str, ArchitectureSpec], dataset: Dataset, config: TrainConfig,
                   encoding: Optional[EncodingSpec] = None,
                   seeds: Optional[Sequence[int]] = None,
                   build_system: Optional[SystemBuilder] = None,
                   on_epoch: Optional[Callable[[int], EpochCallback]] = None) -> ExperimentReport:
    """Train independent repetitions and report their test accuracies.

    Each repetition gets its own seed, which fixes both its initial phases
    and its batch order; the model of the best validation epoch is tested.

    Args:
        notation: Architecture string or parsed spec
        dataset: Loaded dataset with splits
        config: Training settings (``config.repetitions`` seeds starting at
            ``config.seed`` when ``seeds`` is omitted)
        encoding: Input encoding (dataset default when omitted)
        seeds: Explicit seed list
        build_system: ``(spec, seed) -> NetworkSystem``; plain
            :func:`instantiate` when omitted
        on_epoch: ``seed -> callback`` hook invoked after every epoch
    """
    spec = parse_notation(notation) if isinstance(notation, str) else notation
    spec = spec.with_classes(dataset.num_classes)
    encoding = encoding or EncodingSpec.for_dataset(dataset.dataset_id)
    if seeds is None:
        seeds = [config.seed + index for index in range(config.repetitions)]
    build_system = build_system or (lambda s, seed: instantiate(s, seed=seed))

    results = []
    for seed in seeds:
        logger.info("Training %s on %s with seed %d", spec.render(), dataset.dataset_id, seed)
        system = build_system(spec, seed)
        callback = on_epoch(seed) if on_epoch is not None else None
        fitted = fit(system, dataset, config, encoding, seed, callback)
        test = evaluate(fitted.system, dataset.test, encoding,
                        max_workers=config.network_workers)
        logger.info("Seed %d: best epoch %d, val %.4f, test %.4f",
                    seed, fitted.best_epoch, fitted.best_val_accuracy, test.accuracy)
        results.append(RepetitionResult(seed, fitted.best_epoch, fitted.best_val_accuracy,
                                        test.accuracy, fitted))

    report = ExperimentReport(spec.render(), dataset.dataset_id, results)
    if report.single_run:
        logger.warning("Only one repetition: standard deviation reported as 0")
    return report
