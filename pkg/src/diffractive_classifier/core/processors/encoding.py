"""Grayscale conversion and encoding of images as complex input fields."""

import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError
from ..models.labeled_image import LabeledImage
from ..optics.field import DEFAULT_PITCH, ComplexField

logger = logging.getLogger(__name__)

ENCODING_MODES = ('amplitude', 'phase')

# ITU-R 601 luma weights; they sum to 0.9999.
GRAYSCALE_WEIGHTS = (0.2989, 0.5870, 0.1140)

# Auto upsampling fills at most this fraction of the grid side.
AUTO_FILL = 0.85

DATASET_MODES = {'mnist': 'amplitude', 'fashion': 'phase', 'cifar10': 'phase'}


@dataclass
class EncodingSpec:
    """How an image becomes an input field.

    Attributes:
        mode: 'amplitude' (opaque surround) or 'phase' (transparent surround)
        phase_range: Phase delay of a pixel of value 1 in phase mode
        upsample: Integer nearest-neighbour factor; None picks the largest
            factor filling at most 85% of the grid side
    """

    mode: str = 'amplitude'
    phase_range: float = 2 * math.pi
    upsample: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ENCODING_MODES:
            raise ConfigError(f"encoding mode must be one of {ENCODING_MODES}, got {self.mode!r}")
        if not self.phase_range > 0:
            raise ConfigError(f"phase_range must be positive, got {self.phase_range}")
        if self.upsample is not None and (int(self.upsample) != self.upsample or self.upsample < 1):
            raise ConfigError(f"upsample must be a positive integer, got {self.upsample}")

    def factor(self, image_size: int, grid_size: int) -> int:
        """Upsampling factor for an image side on a grid side."""
        if image_size > grid_size:
            raise ConfigError(f"{image_size}-pixel image does not fit a {grid_size}x{grid_size} grid")
        if self.upsample is not None:
            factor = int(self.upsample)
        else:
            factor = max(1, int(math.floor(AUTO_FILL * grid_size / image_size)))
        if factor * image_size > grid_size:
            raise ConfigError(
                f"upsampled image ({factor} x {image_size} = {factor * image_size}) exceeds "
                f"the {grid_size}x{grid_size} grid"
            )
        return factor

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'EncodingSpec':
        known = {item.name for item in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown encoding settings: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def for_dataset(cls, dataset_id: str) -> 'EncodingSpec':
        """MNIST digits are amplitude objects; Fashion-MNIST and CIFAR-10 are phase objects."""
        if dataset_id not in DATASET_MODES:
            raise ConfigError(f"unknown dataset {dataset_id!r}")
        return cls(mode=DATASET_MODES[dataset_id])


def to_grayscale(rgb: np.ndarray, channel_axis: int = -3) -> np.ndarray:
    """Weighted RGB to gray conversion, clipped to [0, 1].

    Args:
        rgb: Array with a length-3 channel axis (R, G, B)
        channel_axis: Position of that axis (channel-first images by default)
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.shape[channel_axis] != 3:
        raise ConfigError(f"expected 3 color channels on axis {channel_axis}, got shape {rgb.shape}")
    channels = np.moveaxis(rgb, channel_axis, -1)
    gray = channels @ np.asarray(GRAYSCALE_WEIGHTS)
    return np.clip(gray, 0.0, 1.0)


def object_window(image_shape: Tuple[int, int], grid_size: int,
                  spec: EncodingSpec) -> Tuple[int, int, int]:
    """(factor, row offset, column offset) of the upsampled object on the grid."""
    rows, cols = image_shape
    factor = min(spec.factor(rows, grid_size), spec.factor(cols, grid_size))
    return factor, (grid_size - rows * factor) // 2, (grid_size - cols * factor) // 2


def encode_pixels(pixels: np.ndarray, spec: EncodingSpec, grid_size: int,
                  pitch: float = DEFAULT_PITCH) -> ComplexField:
    """Encode images of shape (..., H, W) into fields of shape (..., N, N)."""
    pixels = np.asarray(pixels, dtype=np.float64)
    factor, row0, col0 = object_window(pixels.shape[-2:], grid_size, spec)
    upsampled = np.repeat(np.repeat(pixels, factor, axis=-2), factor, axis=-1)
    rows, cols = upsampled.shape[-2:]

    shape = pixels.shape[:-2] + (grid_size, grid_size)
    if spec.mode == 'amplitude':
        values = np.zeros(shape, dtype=np.complex128)
        values[..., row0:row0 + rows, col0:col0 + cols] = upsampled
    else:
        values = np.ones(shape, dtype=np.complex128)
        values[..., row0:row0 + rows, col0:col0 + cols] = np.exp(1j * spec.phase_range * upsampled)
    return ComplexField(values, pitch)


def encode(image: LabeledImage, spec: EncodingSpec, grid_size: int,
           pitch: float = DEFAULT_PITCH) -> ComplexField:
    """Encode one image as an input field.

    Amplitude mode writes the pixel values into an opaque (zero) surround;
    phase mode writes exp(i * phase_range * pixel) into a transparent
    (unit) surround.

    Raises:
        ConfigError: If the image does not fit the grid
    """
    if image.pixels.ndim != 2:
        raise ConfigError(f"encode expects a grayscale image, got shape {image.pixels.shape}")
    return encode_pixels(image.pixels, spec, grid_size, pitch)


def decode(field: ComplexField, spec: EncodingSpec, image_shape: Tuple[int, int]) -> np.ndarray:
    """Recover pixel values from an encoded field.

    Phase objects are recovered only where phase_range * pixel < 2*pi.
    """
    factor, row0, col0 = object_window(image_shape, field.grid_size, spec)
    rows, cols = image_shape
    window = field.values[..., row0:row0 + rows * factor:factor, col0:col0 + cols * factor:factor]
    if spec.mode == 'amplitude':
        return np.abs(window)
    return np.mod(np.angle(window), 2 * math.pi) / spec.phase_range
