"""Angular spectrum free-space propagation and its adjoint.

The transfer function is the exact (non-paraxial) angular spectrum kernel

    H(fx, fy) = exp(i*2*pi*d*sqrt(1/lambda^2 - fx^2 - fy^2))

on propagating frequencies. Evanescent frequencies are either zeroed
('truncate') or attenuated by their real decay factor ('decay').
"""

import logging
from functools import lru_cache

import numpy as np
import scipy.fft

from .field import ComplexField, PropagationGeometry, check_square_grid
from ..exceptions import NumericError, ShapeError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=128)
def _transfer_function(padded_size: int, pitch: float, wavelength: float,
                       distance: float, policy: str, conjugate: bool) -> np.ndarray:
    logger.debug("Computing transfer function: n=%d, pitch=%g, d=%g, policy=%s",
                 padded_size, pitch, distance, policy)
    freqs = scipy.fft.fftfreq(padded_size, d=pitch)
    f_squared = freqs[:, None] ** 2 + freqs[None, :] ** 2
    cutoff = 1.0 / wavelength ** 2
    band = f_squared <= cutoff

    transfer = np.zeros((padded_size, padded_size), dtype=np.complex128)
    kz = np.sqrt(cutoff - f_squared[band])
    transfer[band] = np.exp(1j * 2 * np.pi * distance * kz)
    if policy == 'decay':
        kappa = np.sqrt(f_squared[~band] - cutoff)
        transfer[~band] = np.exp(-2 * np.pi * abs(distance) * kappa)
    if conjugate:
        transfer = np.conj(transfer)

    transfer.setflags(write=False)
    return transfer


def transfer_function(padded_size: int, pitch: float, distance: float,
                      geometry: PropagationGeometry,
                      conjugate: bool = False) -> np.ndarray:
    """Angular spectrum transfer function in FFT frequency order.

    Args:
        padded_size: Samples per side of the padded grid
        pitch: Sample spacing
        distance: Signed propagation distance
        geometry: Wavelength and evanescent policy
        conjugate: Return conj(H), the kernel of the adjoint operator

    Returns:
        Read-only complex array of shape (padded_size, padded_size)
    """
    return _transfer_function(int(padded_size), float(pitch), float(geometry.wavelength),
                              float(distance), geometry.evanescent_policy, bool(conjugate))


def propagating_band(padded_size: int, pitch: float, wavelength: float) -> np.ndarray:
    """Boolean mask of frequencies inside the propagating circle."""
    freqs = scipy.fft.fftfreq(padded_size, d=pitch)
    return freqs[:, None] ** 2 + freqs[None, :] ** 2 <= 1.0 / wavelength ** 2


def pad_grid(values: np.ndarray, padded_size: int) -> np.ndarray:
    """Zero-pad the trailing grid axes, keeping the field centered."""
    size = values.shape[-1]
    if padded_size == size:
        return values.copy()
    offset = (padded_size - size) // 2
    padded = np.zeros(values.shape[:-2] + (padded_size, padded_size), dtype=values.dtype)
    padded[..., offset:offset + size, offset:offset + size] = values
    return padded


def crop_grid(values: np.ndarray, size: int) -> np.ndarray:
    """Inverse of :func:`pad_grid`: take the centered size x size window."""
    padded_size = values.shape[-1]
    if padded_size == size:
        return values
    offset = (padded_size - size) // 2
    return values[..., offset:offset + size, offset:offset + size]


def propagate_values(values: np.ndarray, pitch: float, distance: float,
                     geometry: PropagationGeometry, crop: bool = True,
                     conjugate: bool = False) -> np.ndarray:
    """Array-level propagation used by the network forward and adjoint passes.

    Args:
        values: Complex samples, shape (..., N, N)
        pitch: Sample spacing
        distance: Signed propagation distance
        geometry: Propagation geometry
        crop: Crop back to N x N (False returns the padded grid)
        conjugate: Use conj(H) (adjoint propagation)

    Returns:
        Propagated complex samples
    """
    size = check_square_grid(values)
    if not np.isfinite(distance):
        raise NumericError(f"propagation distance must be finite, got {distance}")

    padded_size = size * int(geometry.pad_factor)
    if distance == 0:
        out = pad_grid(values, padded_size) if not crop else values.copy()
        return out

    transfer = transfer_function(padded_size, pitch, distance, geometry, conjugate)
    transfer = transfer.astype(values.dtype, copy=False)

    spectrum = scipy.fft.fft2(pad_grid(values, padded_size), axes=(-2, -1))
    spectrum *= transfer
    out = scipy.fft.ifft2(spectrum, axes=(-2, -1))
    if crop:
        out = np.ascontiguousarray(crop_grid(out, size))
    return out


def propagate(field: ComplexField, distance: float, geometry: PropagationGeometry,
              crop: bool = True) -> ComplexField:
    """Free-space propagation of a field by a signed distance.

    Negative distances back-propagate. A distance of zero returns an
    identical copy of the field.

    Args:
        field: Input field
        distance: Signed distance in wavelengths
        geometry: Wavelength, padding and evanescent policy
        crop: Crop the padded result back to the input grid

    Returns:
        Propagated field

    Raises:
        ShapeError: If the field grid is not square
        NumericError: If the field or distance is not finite
    """
    field.check_finite()
    return field.with_values(
        propagate_values(field.values, field.pitch, distance, geometry, crop=crop)
    )


def adjoint_propagate(field: ComplexField, distance: float,
                      geometry: PropagationGeometry) -> ComplexField:
    """Adjoint of :func:`propagate` with respect to the complex inner product.

    Pads, multiplies the spectrum by conj(H) and crops, so that
    <propagate(u, d), v> == <u, adjoint_propagate(v, d)>.
    """
    field.check_finite()
    return field.with_values(
        propagate_values(field.values, field.pitch, distance, geometry, conjugate=True)
    )


def propagate_direct(field: ComplexField, distance: float,
                     geometry: PropagationGeometry) -> ComplexField:
    """Reference propagation using explicit DFT matrices instead of the FFT.

    Intended for small grids only (cost is O(Np^3)); evaluates exactly the
    same padded transfer-function product as :func:`propagate`.
    """
    values = field.values
    size = check_square_grid(values)
    padded_size = size * int(geometry.pad_factor)
    if padded_size > 256:
        raise ShapeError(f"direct DFT propagation is limited to small grids, got {padded_size}")

    index = np.arange(padded_size)
    dft = np.exp(-2j * np.pi * np.outer(index, index) / padded_size)
    idft = np.conj(dft) / padded_size

    padded = pad_grid(values.astype(np.complex128), padded_size)
    spectrum = dft @ padded @ dft.T
    if distance != 0:
        spectrum = spectrum * transfer_function(padded_size, field.pitch, distance, geometry)
    out = idft @ spectrum @ idft.T
    return field.with_values(crop_grid(out, size))


def band_power(field: ComplexField, geometry: PropagationGeometry) -> np.ndarray:
    """Power carried by the propagating spatial frequencies of the padded field.

    Uses Parseval's theorem on the zero-padded grid, so the value is directly
    comparable with ``field.total_power()`` for band-limited fields.
    """
    size = field.grid_size
    padded_size = size * int(geometry.pad_factor)
    spectrum = scipy.fft.fft2(pad_grid(field.values, padded_size), axes=(-2, -1))
    band = propagating_band(padded_size, field.pitch, geometry.wavelength)
    power = np.abs(spectrum) ** 2
    return np.sum(power * band, axis=(-2, -1)) / padded_size ** 2
