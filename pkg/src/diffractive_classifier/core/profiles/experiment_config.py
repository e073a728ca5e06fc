"""Experiment configuration: architecture, data, geometry, encoding and training."""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional

from ..architecture.notation import ArchitectureSpec, parse_notation
from ..architecture.system import NetworkSystem, instantiate
from ..detection.layout import DEFAULT_DETECTOR_WIDTH
from ..exceptions import ConfigError
from ..exporters.atomic import atomic_write
from ..importers.dataset_loader import DATASET_IDS
from ..importers.layout_importer import LayoutImporter
from ..models.labeled_image import DEFAULT_VALIDATION_SIZE
from ..optics.field import DEFAULT_LAYER_SPACING, DEFAULT_PITCH, PropagationGeometry
from ..processors.encoding import EncodingSpec
from ..training.config import TrainConfig

logger = logging.getLogger(__name__)

SCALES = ('desk', 'paper')


def _reject_unknown(cls, data: Dict, what: str) -> None:
    known = {item.name for item in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown {what} keys: {', '.join(unknown)}")


@dataclass
class GeometryConfig:
    """Optical geometry overrides.

    ``grid_size`` replaces the neuron count P of the notation by
    ``grid_size ** 2`` when set.
    """

    grid_size: Optional[int] = None
    pitch: float = DEFAULT_PITCH
    wavelength: float = 1.0
    layer_spacing: float = DEFAULT_LAYER_SPACING
    pad_factor: int = 2
    evanescent_policy: str = 'truncate'
    input_distance: Optional[float] = None
    output_distance: Optional[float] = None
    detector_width: float = DEFAULT_DETECTOR_WIDTH
    phase_std: float = 0.2 * math.pi

    def __post_init__(self):
        if self.grid_size is not None and (int(self.grid_size) != self.grid_size
                                           or self.grid_size < 1):
            raise ConfigError(f"grid_size must be a positive integer, got {self.grid_size}")
        if not self.pitch > 0:
            raise ConfigError(f"pitch must be positive, got {self.pitch}")
        if not self.detector_width > 0:
            raise ConfigError(f"detector_width must be positive, got {self.detector_width}")
        self.to_geometry()

    def to_geometry(self) -> PropagationGeometry:
        return PropagationGeometry(self.wavelength, self.layer_spacing, self.pad_factor,
                                   self.evanescent_policy)

    @classmethod
    def from_dict(cls, data: Dict) -> 'GeometryConfig':
        _reject_unknown(cls, data, 'geometry')
        return cls(**data)


@dataclass
class ExperimentConfig:
    """Complete, serializable description of one experiment.

    Attributes:
        notation: Architecture string, e.g. 'D([10,10],[1,5,40k])'
        dataset: 'mnist', 'fashion' or 'cifar10'
        geometry: Optical geometry overrides
        encoding: Input encoding (dataset default when None)
        train: Optimisation settings
        layout_path: JSON detector layout override
        out_dir: Output directory of the run
        seeds: Repetition seeds (``train.repetitions`` seeds from
            ``train.seed`` when None)
        data_root: Dataset root ($DIFFRACTIVE_DATA_ROOT when None)
        train_size: Training images (all remaining when None)
        validation_size: Validation images taken from the training pool
        test_size: Leading test images used (all when None)
        split_seed: Seed of the train/validation shuffle
        learnable_coefficients: Learn p_m, n_m for a same-plane differential design
        class_order: Permutation deciding which classes share a network
        keep_epoch_checkpoints: Save a checkpoint after every epoch (ensemble candidates)
    """

    notation: str = 'D([10,0],[1,5,40k])'
    dataset: str = 'mnist'
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    encoding: Optional[EncodingSpec] = None
    train: TrainConfig = field(default_factory=TrainConfig)
    layout_path: Optional[str] = None
    out_dir: str = 'runs'
    seeds: Optional[List[int]] = None
    data_root: Optional[str] = None
    train_size: Optional[int] = None
    validation_size: int = DEFAULT_VALIDATION_SIZE
    test_size: Optional[int] = None
    split_seed: int = 0
    learnable_coefficients: bool = False
    class_order: Optional[List[int]] = None
    keep_epoch_checkpoints: bool = False

    def __post_init__(self):
        if self.dataset not in DATASET_IDS:
            raise ConfigError(f"unknown dataset {self.dataset!r}; expected one of {DATASET_IDS}")
        if self.seeds is not None:
            self.seeds = [int(seed) for seed in self.seeds]
            if not self.seeds:
                raise ConfigError("seed list is empty")

    @property
    def seed_list(self) -> List[int]:
        if self.seeds is not None:
            return list(self.seeds)
        return [self.train.seed + index for index in range(self.train.repetitions)]

    def resolved_encoding(self) -> EncodingSpec:
        return self.encoding or EncodingSpec.for_dataset(self.dataset)

    def resolved_spec(self, num_classes: Optional[int] = None) -> ArchitectureSpec:
        """Parsed notation with the grid and coefficient overrides applied.

        Raises:
            NotationError: If the notation does not parse
            ConfigError: If the overrides do not fit the architecture
        """
        spec = parse_notation(self.notation)
        if self.geometry.grid_size is not None:
            spec = replace(spec, neurons_per_layer=int(self.geometry.grid_size) ** 2)
        if self.learnable_coefficients and not spec.learnable_coefficients:
            if not spec.differential:
                raise ConfigError(
                    f"learnable coefficients need a differential design, got {spec.render()}"
                )
            spec = replace(spec, learnable_coefficients=True)
        if num_classes is not None:
            spec = spec.with_classes(num_classes)
        return spec

    def build_system(self, spec: ArchitectureSpec, seed: int) -> NetworkSystem:
        """Instantiate a system for ``spec`` with this geometry and layout."""
        geometry = self.geometry
        layouts = None
        if self.layout_path:
            layouts = LayoutImporter.import_file(Path(self.layout_path), spec.grid_size,
                                                 geometry.pitch)
        return instantiate(spec, geometry.to_geometry(), seed=seed, pitch=geometry.pitch,
                           layouts=layouts, detector_width=geometry.detector_width,
                           class_order=self.class_order,
                           input_distance=geometry.input_distance,
                           output_distance=geometry.output_distance,
                           phase_std=geometry.phase_std)

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['encoding'] = None if self.encoding is None else self.encoding.to_dict()
        return data

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Dict) -> 'ExperimentConfig':
        """Build from a dictionary, rejecting unknown keys at every level."""
        _reject_unknown(cls, data, 'experiment')
        data = dict(data)
        if 'geometry' in data:
            data['geometry'] = GeometryConfig.from_dict(data['geometry'] or {})
        if data.get('encoding') is not None:
            data['encoding'] = EncodingSpec.from_dict(data['encoding'])
        if 'train' in data:
            data['train'] = TrainConfig.from_dict(data['train'] or {})
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"invalid experiment configuration: {exc}") from exc

    @classmethod
    def from_json(cls, json_str: str) -> 'ExperimentConfig':
        try:
            data = json.loads(json_str)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc.msg} "
                              f"(line {exc.lineno}, column {exc.colno})") from exc
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: Path) -> 'ExperimentConfig':
        """
        Raises:
            FileNotFoundError: If file doesn't exist
            ConfigError: If the content is invalid
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"File not found: {path}")
        return cls.from_json(path.read_text(encoding='utf-8'))

    def save(self, path: Path) -> Path:
        return atomic_write(path, self.to_json() + '\n')

    @classmethod
    def preset(cls, scale: str, dataset: str = 'mnist', **overrides) -> 'ExperimentConfig':
        """
        Shipped presets.

        'desk': 100x100 grid, 10 epochs, 10000/2000/2000 images, seeds 0-2.
        'paper': 200x200 grid, 50 epochs, full splits, seeds 0-5.
        """
        if scale == 'desk':
            config = cls(dataset=dataset, geometry=GeometryConfig(grid_size=100),
                         train=TrainConfig(epochs=10, repetitions=3),
                         seeds=[0, 1, 2], train_size=10000, validation_size=2000,
                         test_size=2000)
        elif scale == 'paper':
            config = cls(dataset=dataset, geometry=GeometryConfig(grid_size=200),
                         train=TrainConfig(epochs=50, repetitions=6),
                         seeds=list(range(6)))
        else:
            raise ConfigError(f"unknown scale {scale!r}; expected one of {SCALES}")
        return replace(config, **overrides) if overrides else config
