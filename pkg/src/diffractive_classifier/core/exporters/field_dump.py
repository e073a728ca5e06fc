"""Raw and image dumps of complex fields at any stage of a forward pass."""

import io
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from .atomic import atomic_write
from ..exceptions import DataFormatError, ShapeError
from ..optics.field import ComplexField
from ..optics.network import CapturedStages

logger = logging.getLogger(__name__)

RAW_SUFFIX = '.f64'
RAW_HEADER_END = 'END'


def _single(values: np.ndarray) -> np.ndarray:
    if values.ndim != 2:
        raise ShapeError(f"field dumps take a single (N, N) field, got shape {values.shape}")
    return values


def raw_bytes(values: np.ndarray, pitch: float, wavelength: float) -> bytes:
    """Text header then real and imaginary planes as little-endian float64, shape (2, N, N)."""
    values = _single(np.asarray(values))
    planes = np.stack([values.real, values.imag]).astype('<f8')
    header = (f"grid_size={values.shape[-1]}\n"
              f"pitch={pitch!r}\n"
              f"wavelength={wavelength!r}\n"
              f"dtype=<f8\n"
              f"shape={','.join(str(dim) for dim in planes.shape)}\n"
              f"{RAW_HEADER_END}\n")
    return header.encode('ascii') + planes.tobytes()


def read_raw(path: Path) -> Tuple[ComplexField, Dict[str, str]]:
    """
    Read a ``.f64`` dump back into a ComplexField.

    Raises:
        DataFormatError: If the header or data size is wrong
    """
    data = Path(path).read_bytes()
    marker = f"\n{RAW_HEADER_END}\n".encode('ascii')
    end = data.find(marker)
    if end < 0:
        raise DataFormatError(f"{path}: header terminator not found", 0)
    header = dict(line.split('=', 1) for line in data[:end].decode('ascii').splitlines())
    if header.get('dtype') != '<f8':
        raise DataFormatError(f"{path}: unsupported dtype {header.get('dtype')!r}", 0)
    shape = tuple(int(dim) for dim in header['shape'].split(','))
    body = data[end + len(marker):]
    if len(body) != 8 * int(np.prod(shape)):
        raise DataFormatError(f"{path}: expected {8 * int(np.prod(shape))} data bytes, "
                              f"found {len(body)}", end + len(marker))
    planes = np.frombuffer(body, dtype='<f8').reshape(shape)
    values = planes[0] + 1j * planes[1]
    return ComplexField(values, float(header['pitch'])), header


def intensity_png(values: np.ndarray, cmap: str = 'gray') -> bytes:
    """Intensity normalised to a maximum of 1, rendered as PNG bytes."""
    intensity = np.abs(_single(np.asarray(values))) ** 2
    peak = intensity.max()
    normalized = intensity / peak if peak > 0 else intensity
    buffer = io.BytesIO()
    plt.imsave(buffer, normalized, cmap=cmap, vmin=0.0, vmax=1.0, format='png')
    return buffer.getvalue()


def dump_field(field: ComplexField, base_path: Path, wavelength: float = 1.0) -> List[Path]:
    """
    Write ``<base>.png`` and ``<base>.f64`` for a single field.

    Returns:
        The two written paths
    """
    base_path = Path(base_path)
    png = atomic_write(base_path.with_name(base_path.name + '.png'), intensity_png(field.values))
    raw = atomic_write(base_path.with_name(base_path.name + RAW_SUFFIX),
                       raw_bytes(field.values, field.pitch, wavelength))
    return [png, raw]


def dump_stages(stages: CapturedStages, output_dir: Path, pitch: float,
                wavelength: float = 1.0, prefix: str = '',
                sample: Optional[int] = None) -> List[Path]:
    """
    Dump the input, the field leaving every layer and the output plane.

    Args:
        stages: Stages captured by a forward pass
        output_dir: Destination directory
        pitch: Sample spacing
        wavelength: Recorded in the raw headers
        prefix: Filename prefix (e.g. ``net0_``)
        sample: Batch index to dump when the stages hold a batch
    """
    output_dir = Path(output_dir)
    named = [('input', stages.input)]
    named += [(f"layer{index}", values) for index, values in enumerate(stages.modulated)]
    named.append(('output', stages.output))

    written = []
    for name, values in named:
        if values is None:
            continue
        if sample is not None:
            values = values[sample]
        written += dump_field(ComplexField(values, pitch), output_dir / f"{prefix}{name}", wavelength)
    logger.info("Dumped %d stage files to %s", len(written), output_dir)
    return written
