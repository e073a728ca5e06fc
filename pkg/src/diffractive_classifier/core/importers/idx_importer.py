"""IDX file importer for MNIST and Fashion-MNIST."""

import gzip
import logging
import struct
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..exceptions import DataFormatError
from ..models.labeled_image import ImageSet, LabeledImage

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IDXImporter:
    """Reads big-endian IDX image and label files (optionally gzipped)."""

    @staticmethod
    def read_bytes(file_path: Path) -> bytes:
        """
        Read a file, transparently decompressing gzip content.

        Raises:
            FileNotFoundError: If file doesn't exist
            DataFormatError: If a .gz file is corrupt
        """
        file_path = Path(file_path)
        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")
        data = file_path.read_bytes()
        if data[:2] == b'\x1f\x8b':
            try:
                data = gzip.decompress(data)
            except (OSError, EOFError) as exc:
                raise DataFormatError(f"corrupt gzip stream in {file_path}: {exc}") from exc
        return data

    @staticmethod
    def _header(data: bytes, magic: int, dims: int, file_path: Path) -> Tuple[int, ...]:
        header_size = 4 * (1 + dims)
        if len(data) < header_size:
            raise DataFormatError(
                f"{file_path}: file too short for an IDX header ({len(data)} bytes)", len(data)
            )
        found = struct.unpack('>I', data[:4])[0]
        if found != magic:
            raise DataFormatError(
                f"{file_path}: bad magic number 0x{found:08x}, expected 0x{magic:08x}", 0
            )
        return struct.unpack(f'>{dims}I', data[4:header_size])

    @staticmethod
    def read_images(file_path: Path) -> np.ndarray:
        """
        Read an IDX image file.

        Returns:
            float64 array (count, rows, cols) scaled into [0, 1]

        Raises:
            FileNotFoundError: If file doesn't exist
            DataFormatError: Bad magic number or truncated pixel data
        """
        data = IDXImporter.read_bytes(file_path)
        count, rows, cols = IDXImporter._header(data, IMAGE_MAGIC, 3, file_path)
        expected = 16 + count * rows * cols
        if len(data) < expected:
            raise DataFormatError(
                f"{file_path}: truncated pixel data, expected {expected} bytes, found {len(data)}",
                len(data),
            )
        pixels = np.frombuffer(data, dtype=np.uint8, count=count * rows * cols, offset=16)
        return pixels.reshape(count, rows, cols).astype(np.float64) / 255.0

    @staticmethod
    def read_labels(file_path: Path) -> np.ndarray:
        """
        Read an IDX label file.

        Raises:
            FileNotFoundError: If file doesn't exist
            DataFormatError: Bad magic number or truncated label data
        """
        data = IDXImporter.read_bytes(file_path)
        (count,) = IDXImporter._header(data, LABEL_MAGIC, 1, file_path)
        expected = 8 + count
        if len(data) < expected:
            raise DataFormatError(
                f"{file_path}: truncated label data, expected {expected} bytes, found {len(data)}",
                len(data),
            )
        return np.frombuffer(data, dtype=np.uint8, count=count, offset=8).astype(np.int64)

    @staticmethod
    def import_set(images_path: Path, labels_path: Path, name: str = '') -> ImageSet:
        """
        Read matching image and label files into an ImageSet.

        Raises:
            DataFormatError: If the counts differ or a label is out of range
        """
        pixels = IDXImporter.read_images(images_path)
        labels = IDXImporter.read_labels(labels_path)
        if pixels.shape[0] != labels.shape[0]:
            raise DataFormatError(
                f"{images_path} holds {pixels.shape[0]} images but {labels_path} holds "
                f"{labels.shape[0]} labels", 4
            )
        if labels.size and labels.max() >= 10:
            bad = int(np.argmax(labels >= 10))
            raise DataFormatError(f"{labels_path}: label {labels[bad]} out of range", 8 + bad)
        logger.info("Loaded %d images of %dx%d from %s", pixels.shape[0],
                    pixels.shape[1], pixels.shape[2], images_path)
        return ImageSet(pixels, labels, name or Path(images_path).name)


def load_idx(images_path: Path, labels_path: Path) -> List[LabeledImage]:
    """Read an IDX image/label pair as a list of LabeledImage."""
    image_set = IDXImporter.import_set(images_path, labels_path)
    return [image_set[index] for index in range(len(image_set))]
