"""CIFAR-10 binary batch importer."""

import logging
from pathlib import Path
from typing import List, Sequence

import numpy as np

from .idx_importer import IDXImporter
from ..exceptions import DataFormatError
from ..models.labeled_image import ImageSet, LabeledImage
from ..processors.encoding import to_grayscale

logger = logging.getLogger(__name__)

RECORD_SIZE = 1 + 3 * 32 * 32

TRAIN_BATCHES = [f"data_batch_{index}.bin" for index in range(1, 6)]
TEST_BATCH = "test_batch.bin"


class CIFARImporter:
    """Reads CIFAR-10 binary batches: 1 label byte then 3072 pixel bytes per record."""

    @staticmethod
    def read_batch(file_path: Path) -> ImageSet:
        """
        Read one batch file, keeping RGB planes.

        Returns:
            ImageSet with pixels of shape (count, 3, 32, 32) in [0, 1]

        Raises:
            FileNotFoundError: If file doesn't exist
            DataFormatError: If the length is not a multiple of 3073 or a label is invalid
        """
        data = IDXImporter.read_bytes(file_path)
        if len(data) == 0 or len(data) % RECORD_SIZE:
            complete = len(data) // RECORD_SIZE
            raise DataFormatError(
                f"{file_path}: length {len(data)} is not a positive multiple of {RECORD_SIZE}",
                complete * RECORD_SIZE,
            )
        records = np.frombuffer(data, dtype=np.uint8).reshape(-1, RECORD_SIZE)
        labels = records[:, 0].astype(np.int64)
        if labels.max() >= 10:
            bad = int(np.argmax(labels >= 10))
            raise DataFormatError(f"{file_path}: label {labels[bad]} out of range", bad * RECORD_SIZE)
        pixels = records[:, 1:].reshape(-1, 3, 32, 32).astype(np.float64) / 255.0
        return ImageSet(pixels, labels, Path(file_path).name)

    @staticmethod
    def import_batches(file_paths: Sequence[Path], grayscale: bool = True, name: str = '') -> ImageSet:
        """
        Concatenate batch files in the given order.

        Args:
            file_paths: Batch files
            grayscale: Convert to (count, 32, 32) grayscale

        Returns:
            Combined ImageSet
        """
        if not file_paths:
            raise FileNotFoundError("no CIFAR-10 batch files given")
        batches = [CIFARImporter.read_batch(path) for path in file_paths]
        pixels = np.concatenate([batch.pixels for batch in batches], axis=0)
        labels = np.concatenate([batch.labels for batch in batches], axis=0)
        if grayscale:
            pixels = to_grayscale(pixels)
        logger.info("Loaded %d CIFAR-10 images from %d batch file(s)", len(labels), len(batches))
        return ImageSet(pixels, labels, name or 'cifar10')


def load_cifar10(file_paths: Sequence[Path]) -> List[LabeledImage]:
    """Read batch files as RGB LabeledImages (channel-first)."""
    image_set = CIFARImporter.import_batches(file_paths, grayscale=False)
    return [image_set[index] for index in range(len(image_set))]
