"""Locates dataset files under a data root and assembles split datasets."""

import logging
import os
from pathlib import Path
from typing import Dict, List, Optional

from .cifar_importer import TEST_BATCH, TRAIN_BATCHES, CIFARImporter
from .idx_importer import IDXImporter
from ..exceptions import ConfigError
from ..models.labeled_image import DEFAULT_VALIDATION_SIZE, Dataset, DatasetSplits

logger = logging.getLogger(__name__)

DATA_ROOT_ENV = 'DIFFRACTIVE_DATA_ROOT'

DATASET_IDS = ('mnist', 'fashion', 'cifar10')

IDX_FILES = {
    'train_images': 'train-images-idx3-ubyte',
    'train_labels': 'train-labels-idx1-ubyte',
    'test_images': 't10k-images-idx3-ubyte',
    'test_labels': 't10k-labels-idx1-ubyte',
}


def resolve_data_root(root: Optional[Path] = None) -> Path:
    """Explicit root, else $DIFFRACTIVE_DATA_ROOT.

    Raises:
        ConfigError: If neither is set
    """
    if root is not None:
        return Path(root)
    env_root = os.environ.get(DATA_ROOT_ENV)
    if not env_root:
        raise ConfigError(f"no data root given and ${DATA_ROOT_ENV} is not set")
    return Path(env_root)


class DatasetScanner:
    """Finds the canonical files of a dataset in its directory."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)

    def find(self, name: str) -> Path:
        """
        Find ``name`` with or without a .gz suffix, also in one level of subdirectories.

        Raises:
            FileNotFoundError: If no candidate exists
        """
        candidates = [self.directory / name, self.directory / f"{name}.gz"]
        if self.directory.is_dir():
            for sub in sorted(p for p in self.directory.iterdir() if p.is_dir()):
                candidates += [sub / name, sub / f"{name}.gz"]
        for candidate in candidates:
            if candidate.is_file():
                return candidate
        raise FileNotFoundError(f"File not found: {self.directory / name}")

    def idx_files(self) -> Dict[str, Path]:
        return {key: self.find(name) for key, name in IDX_FILES.items()}

    def cifar_files(self) -> Dict[str, List[Path]]:
        return {'train': [self.find(name) for name in TRAIN_BATCHES],
                'test': [self.find(TEST_BATCH)]}


def load_dataset(dataset_id: str, root: Optional[Path] = None, seed: int = 0,
                 train_size: Optional[int] = None,
                 validation_size: int = DEFAULT_VALIDATION_SIZE,
                 test_size: Optional[int] = None) -> Dataset:
    """
    Load a dataset from ``<root>/<dataset_id>/`` and split it.

    Args:
        dataset_id: 'mnist', 'fashion' or 'cifar10'
        root: Data root (defaults to $DIFFRACTIVE_DATA_ROOT)
        seed: Seed of the train/validation shuffle
        train_size: Training images (all remaining by default)
        validation_size: Validation images taken from the training pool
        test_size: Leading test images used (all by default)

    Returns:
        Dataset with splits applied

    Raises:
        ConfigError: Unknown dataset or sizes that do not fit
        FileNotFoundError: Missing files
        DataFormatError: Malformed files
    """
    if dataset_id not in DATASET_IDS:
        raise ConfigError(f"unknown dataset {dataset_id!r}; expected one of {DATASET_IDS}")
    scanner = DatasetScanner(resolve_data_root(root) / dataset_id)

    if dataset_id == 'cifar10':
        files = scanner.cifar_files()
        pool = CIFARImporter.import_batches(files['train'], name='cifar10/train')
        test_pool = CIFARImporter.import_batches(files['test'], name='cifar10/test')
    else:
        files = scanner.idx_files()
        pool = IDXImporter.import_set(files['train_images'], files['train_labels'],
                                      f"{dataset_id}/train")
        test_pool = IDXImporter.import_set(files['test_images'], files['test_labels'],
                                           f"{dataset_id}/test")

    splits = DatasetSplits.from_pool(len(pool), len(test_pool), seed=seed,
                                     validation_size=validation_size, train_size=train_size,
                                     test_subset=test_size)
    dataset = Dataset(dataset_id, pool, test_pool, splits)
    logger.info("Loaded %r", dataset)
    return dataset
