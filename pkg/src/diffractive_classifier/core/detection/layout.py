"""Photodetector geometry on an output plane.

Coordinates are in wavelengths. Sample (r, c) of an N x N grid sits at
x = (c - (N-1)/2) * pitch, y = ((N-1)/2 - r) * pitch, so y points up while
rows count down. A sample belongs to a detector when its center lies inside
the closed square region.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import LayoutError

logger = logging.getLogger(__name__)

DEFAULT_DETECTOR_WIDTH = 6.4

SIGNS = ('single', 'positive', 'negative')

# Sample centers exactly on a region edge count as inside.
_EDGE_TOLERANCE = 1e-9


def sample_coordinates(grid_size: int, pitch: float) -> Tuple[np.ndarray, np.ndarray]:
    """x coordinates of the columns and y coordinates of the rows."""
    offsets = (np.arange(grid_size) - (grid_size - 1) / 2.0) * pitch
    return offsets, -offsets


def index_to_position(row: int, col: int, grid_size: int, pitch: float) -> Tuple[float, float]:
    half = (grid_size - 1) / 2.0
    return ((col - half) * pitch, (half - row) * pitch)


@dataclass(frozen=True)
class DetectorRegion:
    """Square photodetector on one output plane.

    Attributes:
        center: (x, y) of the square center
        class_id: Class whose score this detector feeds
        sign: 'single', 'positive' or 'negative'
        width: Side length of the square
    """

    center: Tuple[float, float]
    class_id: int
    sign: str = 'single'
    width: float = DEFAULT_DETECTOR_WIDTH

    def __post_init__(self):
        object.__setattr__(self, 'center', (float(self.center[0]), float(self.center[1])))
        if self.sign not in SIGNS:
            raise LayoutError(f"detector sign must be one of {SIGNS}, got {self.sign!r}")
        if not self.width > 0:
            raise LayoutError(f"detector width must be positive, got {self.width}")
        if int(self.class_id) != self.class_id or self.class_id < 0:
            raise LayoutError(f"class_id must be a non-negative integer, got {self.class_id}")

    def describe(self) -> str:
        return (f"class {self.class_id} {self.sign} detector at "
                f"({self.center[0]:g}, {self.center[1]:g}) width {self.width:g}")

    def bounds(self) -> Tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max) of the closed square."""
        half = self.width / 2.0
        x, y = self.center
        return (x - half, x + half, y - half, y + half)

    def overlaps(self, other: 'DetectorRegion') -> bool:
        """True when the open interiors of the two squares intersect."""
        reach = (self.width + other.width) / 2.0
        return (abs(self.center[0] - other.center[0]) < reach - _EDGE_TOLERANCE
                and abs(self.center[1] - other.center[1]) < reach - _EDGE_TOLERANCE)

    def fits(self, grid_size: int, pitch: float) -> bool:
        limit = grid_size * pitch / 2.0 + _EDGE_TOLERANCE
        x_min, x_max, y_min, y_max = self.bounds()
        return x_min >= -limit and x_max <= limit and y_min >= -limit and y_max <= limit

    def mask(self, grid_size: int, pitch: float) -> np.ndarray:
        """Boolean N x N mask of the samples covered by this detector."""
        xs, ys = sample_coordinates(grid_size, pitch)
        half = self.width / 2.0 + _EDGE_TOLERANCE * pitch
        cols = np.abs(xs - self.center[0]) <= half
        rows = np.abs(ys - self.center[1]) <= half
        return rows[:, None] & cols[None, :]

    def to_dict(self) -> Dict:
        return {
            'class_id': int(self.class_id),
            'sign': self.sign,
            'center': [self.center[0], self.center[1]],
            'width': self.width,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'DetectorRegion':
        return cls(center=tuple(data['center']), class_id=int(data['class_id']),
                   sign=data.get('sign', 'single'),
                   width=float(data.get('width', DEFAULT_DETECTOR_WIDTH)))


@lru_cache(maxsize=64)
def _mask_matrix(regions: Tuple[DetectorRegion, ...], grid_size: int, pitch: float) -> np.ndarray:
    matrix = np.zeros((len(regions), grid_size * grid_size), dtype=np.float64)
    for index, region in enumerate(regions):
        matrix[index] = region.mask(grid_size, pitch).ravel()
    matrix.setflags(write=False)
    return matrix


@dataclass
class DetectorLayout:
    """All detectors placed on the output plane of one network."""

    plane_id: int
    regions: List[DetectorRegion] = field(default_factory=list)

    def __repr__(self) -> str:
        return f"DetectorLayout(plane={self.plane_id}, regions={len(self.regions)})"

    def __len__(self) -> int:
        return len(self.regions)

    @property
    def class_ids(self) -> List[int]:
        return sorted({region.class_id for region in self.regions})

    def regions_with_sign(self, sign: str) -> List[Tuple[int, DetectorRegion]]:
        """(region index, region) pairs with the given sign, in layout order."""
        return [(index, region) for index, region in enumerate(self.regions)
                if region.sign == sign]

    def describe_region(self, index: int) -> str:
        return f"region {index} on plane {self.plane_id} ({self.regions[index].describe()})"

    def validate(self, grid_size: Optional[int] = None, pitch: Optional[float] = None) -> None:
        """Check placement and disjointness.

        Raises:
            LayoutError: Naming the first offending region
        """
        for index, region in enumerate(self.regions):
            if grid_size is not None:
                if not region.fits(grid_size, pitch):
                    raise LayoutError(
                        f"{self.describe_region(index)} extends outside the "
                        f"{grid_size}x{grid_size} grid at pitch {pitch:g}"
                    )
                if not region.mask(grid_size, pitch).any():
                    raise LayoutError(f"{self.describe_region(index)} covers no samples")
            for other in range(index):
                if region.overlaps(self.regions[other]):
                    raise LayoutError(
                        f"{self.describe_region(index)} overlaps "
                        f"{self.describe_region(other)}"
                    )
        if grid_size is not None and self.regions:
            counts = self.mask_matrix(grid_size, pitch).sum(axis=0)
            if counts.max() > 1:
                shared = int(np.argmax(counts))
                owners = [index for index, region in enumerate(self.regions)
                          if region.mask(grid_size, pitch).ravel()[shared]]
                raise LayoutError(
                    f"{self.describe_region(owners[1])} shares samples with "
                    f"{self.describe_region(owners[0])}"
                )

    def mask_matrix(self, grid_size: int, pitch: float) -> np.ndarray:
        """Read-only (regions, N*N) indicator matrix."""
        return _mask_matrix(tuple(self.regions), int(grid_size), float(pitch))

    def read(self, intensity: np.ndarray, pitch: float) -> np.ndarray:
        """Detector signals for an intensity array of shape (..., N, N).

        Returns:
            Array of shape (..., regions), in layout order
        """
        grid_size = intensity.shape[-1]
        flat = intensity.reshape(intensity.shape[:-2] + (grid_size * grid_size,))
        return flat @ self.mask_matrix(grid_size, pitch).T

    def intensity_gradient(self, signal_gradient: np.ndarray, grid_size: int,
                           pitch: float) -> np.ndarray:
        """Back-project dLoss/dsignal (..., regions) onto the grid as dLoss/dI."""
        flat = signal_gradient @ self.mask_matrix(grid_size, pitch)
        return flat.reshape(signal_gradient.shape[:-1] + (grid_size, grid_size))

    def to_dict(self) -> Dict:
        return {
            'plane_id': int(self.plane_id),
            'regions': [region.to_dict() for region in self.regions],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'DetectorLayout':
        return cls(plane_id=int(data['plane_id']),
                   regions=[DetectorRegion.from_dict(item) for item in data.get('regions', [])])


def read_detector(field, region: DetectorRegion) -> np.ndarray:
    """Optical power collected by one detector.

    Args:
        field: ComplexField at the output plane
        region: Detector to read

    Returns:
        Sum of |u|^2 over the covered samples (per batch entry)

    Raises:
        LayoutError: If the region lies outside the grid
    """
    if not region.fits(field.grid_size, field.pitch):
        raise LayoutError(f"{region.describe()} lies outside the {field.grid_size}x"
                          f"{field.grid_size} grid")
    mask = region.mask(field.grid_size, field.pitch)
    return field.intensity()[..., mask].sum(axis=-1)


def squarest_arrangement(count: int, row_multiplier: int = 1) -> Tuple[int, int]:
    """(cols, rows) minimising max(cols, rows * row_multiplier) for ``count`` cells.

    Ties prefer fewer empty cells, then wider arrangements.
    """
    best = None
    for cols in range(1, count + 1):
        rows = math.ceil(count / cols)
        key = (max(cols, rows * row_multiplier), cols * rows, -cols)
        if best is None or key < best[0]:
            best = (key, cols, rows)
    return best[1], best[2]


def _covered_half_width(width: float, pitch: float) -> int:
    return int(math.floor(width / 2.0 / pitch + _EDGE_TOLERANCE))


def _line_positions(count: int, spacing: int, grid_size: int) -> List[int]:
    start = (grid_size - 1 - (count - 1) * spacing) // 2
    return [start + index * spacing for index in range(count)]


def _resolve_spacing(width: float, pitch: float, limits: Iterable[int]) -> int:
    preferred = int(math.ceil(2.0 * width / pitch - _EDGE_TOLERANCE))
    spacing = min([preferred] + [limit for limit in limits])
    if spacing * pitch <= width:
        raise LayoutError(
            f"cannot place detectors of width {width:g}: the largest spacing that fits "
            f"the grid is {spacing * pitch:g}"
        )
    return spacing


def _fit_limit(count: int, covered: int, grid_size: int) -> int:
    """Largest spacing placing ``count`` detectors of ``covered`` samples in the grid."""
    if count <= 1:
        return grid_size
    return (grid_size - covered) // (count - 1)


def grid_layout(class_ids: Sequence[int], grid_size: int, pitch: float,
                width: float = DEFAULT_DETECTOR_WIDTH, plane_id: int = 0,
                sign: str = 'single') -> DetectorLayout:
    """One detector per class on a centered near-square grid.

    Classes fill the grid row by row; a short last row is centered.
    Detectors snap to sample centers.

    Raises:
        LayoutError: If the detectors cannot be spaced wider than their width
    """
    count = len(class_ids)
    if count == 0:
        return DetectorLayout(plane_id, [])
    cols, rows = squarest_arrangement(count)
    half = _covered_half_width(width, pitch)
    covered = 2 * half + 1
    spacing = _resolve_spacing(width, pitch, [_fit_limit(cols, covered, grid_size),
                                              _fit_limit(rows, covered, grid_size)])

    row_positions = _line_positions(rows, spacing, grid_size)
    regions = []
    for row in range(rows):
        in_row = list(class_ids[row * cols:(row + 1) * cols])
        col_positions = _line_positions(len(in_row), spacing, grid_size)
        for class_id, col in zip(in_row, col_positions):
            center = index_to_position(row_positions[row], col, grid_size, pitch)
            regions.append(DetectorRegion(center, int(class_id), sign, width))

    layout = DetectorLayout(plane_id, regions)
    layout.validate(grid_size, pitch)
    logger.debug("Placed %d %s detectors on plane %d (spacing %d samples)",
                 count, sign, plane_id, spacing)
    return layout


def differential_layout(class_ids: Sequence[int], grid_size: int, pitch: float,
                        width: float = DEFAULT_DETECTOR_WIDTH,
                        plane_id: int = 0) -> DetectorLayout:
    """Positive/negative detector pairs on one plane.

    Positive detectors occupy the upper half of the plane; each negative
    detector sits at the mirror image (row r -> N-1-r) of its positive partner.
    """
    count = len(class_ids)
    if count == 0:
        return DetectorLayout(plane_id, [])
    cols, rows = squarest_arrangement(count, row_multiplier=2)
    half = _covered_half_width(width, pitch)
    covered = 2 * half + 1

    # Rows of the upper half must keep ``half`` samples of margin at the top
    # and a full spacing to their mirror images across the center.
    def rows_fit(spacing: int) -> bool:
        last = (grid_size - 1 - spacing) // 2
        return last - (rows - 1) * spacing >= half

    preferred = int(math.ceil(2.0 * width / pitch - _EDGE_TOLERANCE))
    row_limit = preferred
    while row_limit > 0 and not rows_fit(row_limit):
        row_limit -= 1
    spacing = _resolve_spacing(width, pitch, [_fit_limit(cols, covered, grid_size), row_limit])

    last = (grid_size - 1 - spacing) // 2
    upper_rows = [last - (rows - 1 - index) * spacing for index in range(rows)]

    positives, negatives = [], []
    for row in range(rows):
        in_row = list(class_ids[row * cols:(row + 1) * cols])
        col_positions = _line_positions(len(in_row), spacing, grid_size)
        for class_id, col in zip(in_row, col_positions):
            r = upper_rows[row]
            positives.append(DetectorRegion(
                index_to_position(r, col, grid_size, pitch), int(class_id), 'positive', width))
            negatives.append(DetectorRegion(
                index_to_position(grid_size - 1 - r, col, grid_size, pitch),
                int(class_id), 'negative', width))

    layout = DetectorLayout(plane_id, positives + negatives)
    layout.validate(grid_size, pitch)
    logger.debug("Placed %d differential pairs on plane %d (spacing %d samples)",
                 count, plane_id, spacing)
    return layout


def check_layouts_match(first: Sequence[DetectorLayout],
                        second: Sequence[DetectorLayout]) -> bool:
    """True when two layout lists place identical detectors on every plane."""
    if len(first) != len(second):
        return False
    return all(a.regions == b.regions for a, b in zip(first, second))
