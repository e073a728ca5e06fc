"""Image dataset models: single images, image sets and split indices."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ConfigError

DEFAULT_VALIDATION_SIZE = 5000


@dataclass
class LabeledImage:
    """One grayscale (or RGB, before conversion) image with its class label."""

    pixels: np.ndarray
    label: int
    source_size: Tuple[int, int] = field(default=None)

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.source_size is None:
            self.source_size = tuple(self.pixels.shape[-2:])
        if self.pixels.size and (self.pixels.min() < 0 or self.pixels.max() > 1):
            raise ConfigError("pixel values must lie in [0, 1]")

    def __repr__(self) -> str:
        return f"LabeledImage(label={self.label}, size={self.source_size})"


@dataclass
class ImageSet:
    """Stacked images of one source, shape (K, H, W) or (K, 3, H, W)."""

    pixels: np.ndarray
    labels: np.ndarray
    name: str = ''
    num_classes: int = 10

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.pixels.shape[0] != self.labels.shape[0]:
            raise ConfigError(
                f"{self.pixels.shape[0]} images but {self.labels.shape[0]} labels in {self.name or 'image set'}"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ConfigError(f"labels must lie in [0, {self.num_classes})")

    def __repr__(self) -> str:
        return f"ImageSet(name={self.name!r}, images={len(self)}, shape={self.image_shape})"

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __getitem__(self, index: int) -> LabeledImage:
        return LabeledImage(self.pixels[index], int(self.labels[index]))

    @property
    def image_shape(self) -> Tuple[int, ...]:
        return tuple(self.pixels.shape[1:])

    def subset(self, indices: Sequence[int], name: Optional[str] = None) -> 'ImageSet':
        indices = np.asarray(indices, dtype=np.int64)
        return ImageSet(self.pixels[indices], self.labels[indices],
                        name if name is not None else self.name, self.num_classes)


@dataclass
class DatasetSplits:
    """Index lists into the training pool (train, validation) and the test set."""

    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        self.train = np.asarray(self.train, dtype=np.int64)
        self.validation = np.asarray(self.validation, dtype=np.int64)
        self.test = np.asarray(self.test, dtype=np.int64)
        if np.intersect1d(self.train, self.validation).size:
            raise ConfigError("train and validation splits overlap")

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)

    @classmethod
    def from_pool(cls, pool_size: int, test_size: int, seed: int = 0,
                  validation_size: int = DEFAULT_VALIDATION_SIZE,
                  train_size: Optional[int] = None,
                  test_subset: Optional[int] = None) -> 'DatasetSplits':
        """Split a training pool under a seeded shuffle.

        Validation takes the last ``validation_size`` entries of the shuffled
        pool; training takes the first ``train_size`` (all the rest by
        default). The test split is the canonical test set, optionally its
        first ``test_subset`` images.

        Raises:
            ConfigError: If the requested sizes do not fit the pool
        """
        if validation_size < 0 or validation_size >= pool_size:
            raise ConfigError(
                f"validation size {validation_size} does not fit a pool of {pool_size}"
            )
        available = pool_size - validation_size
        train_size = available if train_size is None else train_size
        if not 0 < train_size <= available:
            raise ConfigError(
                f"train size {train_size} does not fit the {available} images left after validation"
            )
        test_size_used = test_size if test_subset is None else test_subset
        if not 0 <= test_size_used <= test_size:
            raise ConfigError(f"test subset {test_subset} exceeds the {test_size} test images")

        order = np.random.default_rng(seed).permutation(pool_size)
        return cls(train=np.sort(order[:train_size]),
                   validation=np.sort(order[pool_size - validation_size:]),
                   test=np.arange(test_size_used))


@dataclass
class Dataset:
    """A loaded dataset with its splits applied."""

    dataset_id: str
    pool: ImageSet
    test_pool: ImageSet
    splits: DatasetSplits

    def __repr__(self) -> str:
        train, validation, test = self.splits.sizes()
        return f"Dataset({self.dataset_id}, train={train}, validation={validation}, test={test})"

    @property
    def num_classes(self) -> int:
        return self.pool.num_classes

    @property
    def train(self) -> ImageSet:
        return self.pool.subset(self.splits.train, f"{self.dataset_id}/train")

    @property
    def validation(self) -> ImageSet:
        return self.pool.subset(self.splits.validation, f"{self.dataset_id}/validation")

    @property
    def test(self) -> ImageSet:
        return self.test_pool.subset(self.splits.test, f"{self.dataset_id}/test")

    def split(self, name: str) -> ImageSet:
        if name not in ('train', 'validation', 'test'):
            raise ConfigError(f"unknown split {name!r}; expected train, validation or test")
        return getattr(self, name)
