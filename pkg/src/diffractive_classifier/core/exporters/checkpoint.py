"""Self-describing binary checkpoints of trained network systems.

Layout of a checkpoint file::

    DIFFRACTIVE-CHECKPOINT <version>\\n
    <JSON header on one line>\\n
    END\\n
    <little-endian float64 arrays, in header order>

The header records the architecture, geometry, detector layouts and the
name and shape of every array; it contains no timestamps, so identical
runs produce identical files.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .atomic import atomic_write
from ..architecture.notation import ArchitectureSpec
from ..architecture.system import NetworkSystem
from ..detection.layout import DetectorLayout
from ..detection.scores import DetectorCoefficients
from ..exceptions import DataFormatError
from ..optics.field import PhaseLayer, PropagationGeometry
from ..optics.network import DiffractiveNetwork
from ..training.optimizer import Adam

logger = logging.getLogger(__name__)

MAGIC = 'DIFFRACTIVE-CHECKPOINT'
FORMAT_VERSION = 1
ARRAY_DTYPE = '<f8'
HEADER_END = 'END'


@dataclass
class Checkpoint:
    """A loaded checkpoint."""

    system: NetworkSystem
    optimizer: Optional[Adam] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    version: int = FORMAT_VERSION


def _system_arrays(system: NetworkSystem) -> Dict[str, np.ndarray]:
    arrays = {}
    for index, network in enumerate(system.networks):
        for layer_index, layer in enumerate(network.layers):
            arrays[f"net{index}.layer{layer_index}"] = layer.phase
    if system.coefficients is not None:
        arrays['coefficients.p'] = system.coefficients.p
        arrays['coefficients.n'] = system.coefficients.n
    return arrays


def checkpoint_bytes(system: NetworkSystem, optimizer: Optional[Adam] = None,
                     metadata: Optional[Dict[str, Any]] = None) -> bytes:
    """Serialize a system (and optionally its optimizer state) to checkpoint bytes."""
    arrays = _system_arrays(system)
    if optimizer is not None:
        arrays.update(optimizer.state_arrays())

    reference = system.networks[0]
    header = {
        'version': FORMAT_VERSION,
        'notation': system.spec.render(),
        'spec': system.spec.to_dict(),
        'num_classes': system.num_classes,
        'geometry': system.geometry.to_dict(),
        'input_distance': reference.input_distance,
        'output_distance': reference.output_distance,
        'pitch': system.pitch,
        'layouts': [layout.to_dict() for layout in system.layouts],
        'class_order': system.class_order,
        'coefficients': None if system.coefficients is None
        else {'learnable': system.coefficients.learnable},
        'optimizer_step': None if optimizer is None else optimizer.t,
        'optimizer_settings': None if optimizer is None else {
            'beta1': optimizer.beta1, 'beta2': optimizer.beta2, 'epsilon': optimizer.epsilon},
        'dtype': ARRAY_DTYPE,
        'arrays': [{'name': name, 'shape': list(value.shape)} for name, value in arrays.items()],
        'metadata': metadata or {},
    }
    text = f"{MAGIC} {FORMAT_VERSION}\n{json.dumps(header, sort_keys=True)}\n{HEADER_END}\n"
    body = b''.join(np.ascontiguousarray(value, dtype=ARRAY_DTYPE).tobytes()
                    for value in arrays.values())
    return text.encode('utf-8') + body


def save_checkpoint(path: Path, system: NetworkSystem, optimizer: Optional[Adam] = None,
                    metadata: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write a checkpoint atomically.

    Args:
        path: Output file
        system: System to save
        optimizer: Adam state to save alongside (optional)
        metadata: JSON-serializable training metadata (epoch, seed, metrics)

    Returns:
        The written path
    """
    path = atomic_write(path, checkpoint_bytes(system, optimizer, metadata))
    logger.info("Saved checkpoint %s (%s)", path, system.spec.render())
    return path


def _read_header(data: bytes, path: Path):
    first_end = data.find(b'\n')
    if first_end < 0:
        raise DataFormatError(f"{path}: missing checkpoint header", 0)
    magic_line = data[:first_end].decode('utf-8', errors='replace').split()
    if len(magic_line) != 2 or magic_line[0] != MAGIC:
        raise DataFormatError(f"{path}: not a checkpoint file", 0)
    try:
        version = int(magic_line[1])
    except ValueError as exc:
        raise DataFormatError(f"{path}: bad version field {magic_line[1]!r}", 0) from exc
    if version != FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: checkpoint version {version} is not supported (expected {FORMAT_VERSION})", 0
        )

    marker = f"\n{HEADER_END}\n".encode('utf-8')
    end = data.find(marker, first_end)
    if end < 0:
        raise DataFormatError(f"{path}: header terminator not found", first_end)
    try:
        header = json.loads(data[first_end + 1:end].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: corrupt header: {exc}", first_end + 1) from exc
    return header, end + len(marker)


def _read_arrays(data: bytes, offset: int, entries: List[Dict], path: Path) -> Dict[str, np.ndarray]:
    arrays = {}
    for entry in entries:
        shape = tuple(int(dim) for dim in entry['shape'])
        count = int(np.prod(shape)) if shape else 1
        size = 8 * count
        if offset + size > len(data):
            raise DataFormatError(f"{path}: truncated array {entry['name']!r}", offset)
        arrays[entry['name']] = np.frombuffer(
            data, dtype=ARRAY_DTYPE, count=count, offset=offset
        ).reshape(shape).astype(np.float64)
        offset += size
    if offset != len(data):
        raise DataFormatError(f"{path}: {len(data) - offset} trailing bytes", offset)
    return arrays


def load_checkpoint(path: Path) -> Checkpoint:
    """
    Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        FileNotFoundError: If the file doesn't exist
        DataFormatError: Wrong magic, unsupported version, corrupt header or
            truncated arrays
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    data = path.read_bytes()
    header, offset = _read_header(data, path)
    if header.get('dtype') != ARRAY_DTYPE:
        raise DataFormatError(f"{path}: unsupported array dtype {header.get('dtype')!r}", 0)
    arrays = _read_arrays(data, offset, header['arrays'], path)

    try:
        spec = ArchitectureSpec.from_dict(header['spec'])
        geometry = PropagationGeometry.from_dict(header['geometry'])
        networks = []
        for index in range(spec.n_networks):
            layers = [PhaseLayer(arrays[f"net{index}.layer{layer_index}"])
                      for layer_index in range(spec.layers_per_network)]
            networks.append(DiffractiveNetwork(layers, geometry, header['input_distance'],
                                               header['output_distance']))
        layouts = [DetectorLayout.from_dict(item) for item in header['layouts']]
        coefficients = None
        if header['coefficients'] is not None:
            coefficients = DetectorCoefficients(arrays['coefficients.p'], arrays['coefficients.n'],
                                                header['coefficients']['learnable'])
    except KeyError as exc:
        raise DataFormatError(f"{path}: missing checkpoint entry {exc}", offset) from exc

    system = NetworkSystem(spec, networks, layouts, float(header['pitch']), coefficients,
                           header['class_order'])

    optimizer = None
    if header.get('optimizer_step') is not None:
        optimizer = Adam(**header['optimizer_settings'])
        optimizer.load_state_arrays({name: value for name, value in arrays.items()
                                     if name.startswith('adam.')},
                                    header['optimizer_step'])

    logger.info("Loaded checkpoint %s (%s)", path, header['notation'])
    return Checkpoint(system, optimizer, header.get('metadata', {}), header['version'])
