"""Field, phase-layer and geometry data types for the optical forward model."""

from dataclasses import dataclass, asdict
from typing import Dict, Tuple

import numpy as np

from ..exceptions import ConfigError, NumericError, ShapeError

DEFAULT_PITCH = 0.5
DEFAULT_LAYER_SPACING = 40.0

EVANESCENT_POLICIES = ('truncate', 'decay')


def check_square_grid(values: np.ndarray, name: str = 'field') -> int:
    """Validate that the last two axes form a square grid.

    Args:
        values: Array whose trailing axes are the grid
        name: Name used in error messages

    Returns:
        Grid size (samples per side)

    Raises:
        ShapeError: If the grid is not square or smaller than 2x2
    """
    if values.ndim < 2:
        raise ShapeError(f"{name} must have at least 2 dimensions, got shape {values.shape}")
    rows, cols = values.shape[-2:]
    if rows != cols:
        raise ShapeError(f"{name} grid must be square, got {rows}x{cols}")
    if rows < 2:
        raise ShapeError(f"{name} grid must be at least 2x2, got {rows}x{cols}")
    return rows


@dataclass
class ComplexField:
    """Complex scalar wave amplitude sampled on a square grid.

    ``values`` may carry leading batch axes; the grid is always the last two
    axes. Lengths are in units of the wavelength.
    """

    values: np.ndarray
    pitch: float = DEFAULT_PITCH

    def __post_init__(self):
        values = np.asarray(self.values)
        if not np.iscomplexobj(values):
            values = values.astype(np.complex128)
        self.values = values
        check_square_grid(values)
        if not self.pitch > 0:
            raise ConfigError(f"pitch must be positive, got {self.pitch}")

    def __repr__(self) -> str:
        return f"ComplexField(shape={self.values.shape}, pitch={self.pitch})"

    @property
    def grid_size(self) -> int:
        return self.values.shape[-1]

    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.values.shape[:-2]

    def intensity(self) -> np.ndarray:
        """Elementwise |u|^2."""
        return self.values.real ** 2 + self.values.imag ** 2

    def total_power(self) -> np.ndarray:
        """Sum of |u|^2 over the grid (one value per batch entry)."""
        return self.intensity().sum(axis=(-2, -1))

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise NumericError("field contains non-finite values")

    def with_values(self, values: np.ndarray) -> 'ComplexField':
        """Return a field on the same grid with new sample values."""
        return ComplexField(values, self.pitch)

    @classmethod
    def plane_wave(cls, grid_size: int, pitch: float = DEFAULT_PITCH,
                   dtype=np.complex128) -> 'ComplexField':
        """Uniform unit-amplitude plane wave at normal incidence."""
        return cls(np.ones((grid_size, grid_size), dtype=dtype), pitch)


@dataclass
class PhaseLayer:
    """Phase-only diffractive layer.

    Phases are stored unwrapped; only ``phase mod 2*pi`` affects the field.
    """

    phase: np.ndarray
    trainable: bool = True

    def __post_init__(self):
        self.phase = np.asarray(self.phase, dtype=np.float64)
        check_square_grid(self.phase, 'phase layer')
        if self.phase.ndim != 2:
            raise ShapeError(f"phase layer must be 2D, got shape {self.phase.shape}")

    @property
    def grid_size(self) -> int:
        return self.phase.shape[-1]

    def transmittance(self, dtype=np.complex128) -> np.ndarray:
        """exp(i*phase), unit magnitude everywhere."""
        return np.exp(1j * self.phase).astype(dtype, copy=False)

    @classmethod
    def gaussian(cls, grid_size: int, rng: np.random.Generator,
                 std: float = 0.2 * np.pi) -> 'PhaseLayer':
        """Zero-mean Gaussian phase initialisation."""
        return cls(rng.normal(0.0, std, size=(grid_size, grid_size)))


@dataclass(frozen=True)
class PropagationGeometry:
    """Free-space geometry shared by all propagations of one network.

    Attributes:
        wavelength: Illumination wavelength (the unit of every length)
        layer_spacing: Distance between consecutive layers
        pad_factor: Zero-padding multiple used by the FFT propagator
        evanescent_policy: 'truncate' zeroes evanescent frequencies,
            'decay' applies their real exponential decay
    """

    wavelength: float = 1.0
    layer_spacing: float = DEFAULT_LAYER_SPACING
    pad_factor: int = 2
    evanescent_policy: str = 'truncate'

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ConfigError(f"wavelength must be positive, got {self.wavelength}")
        if not self.layer_spacing > 0:
            raise ConfigError(f"layer_spacing must be positive, got {self.layer_spacing}")
        if int(self.pad_factor) != self.pad_factor or self.pad_factor < 1:
            raise ConfigError(f"pad_factor must be an integer >= 1, got {self.pad_factor}")
        if self.evanescent_policy not in EVANESCENT_POLICIES:
            raise ConfigError(
                f"evanescent_policy must be one of {EVANESCENT_POLICIES}, "
                f"got {self.evanescent_policy!r}"
            )

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'PropagationGeometry':
        return cls(**data)
