"""Diffractive network forward model and exact adjoint gradients."""

import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .field import ComplexField, PhaseLayer, PropagationGeometry, check_square_grid
from .propagation import propagate_values
from ..exceptions import ShapeError, StateError

logger = logging.getLogger(__name__)


def modulate(field: ComplexField, layer: PhaseLayer) -> ComplexField:
    """Apply a phase-only layer: output = field * exp(i*phase).

    Raises:
        ShapeError: If the layer and field grids differ
    """
    if layer.grid_size != field.grid_size:
        raise ShapeError(
            f"phase layer grid {layer.grid_size} does not match field grid {field.grid_size}"
        )
    return field.with_values(field.values * layer.transmittance(field.values.dtype))


@dataclass
class CapturedStages:
    """Intermediate fields recorded during a forward pass.

    Attributes:
        input: Field at the input plane
        arriving: Field arriving at each layer (before modulation)
        modulated: Field leaving each layer (after modulation)
        output: Field at the output plane
    """

    input: Optional[np.ndarray] = None
    arriving: List[np.ndarray] = field(default_factory=list)
    modulated: List[np.ndarray] = field(default_factory=list)
    output: Optional[np.ndarray] = None

    @property
    def complete(self) -> bool:
        return self.input is not None and self.output is not None

    def clear(self) -> None:
        self.input = None
        self.arriving = []
        self.modulated = []
        self.output = None


@dataclass
class DiffractiveNetwork:
    """Ordered stack of phase-only layers with its free-space geometry.

    The optical path is: input plane -> input_distance -> layer 0 ->
    layer_spacing -> ... -> layer L-1 -> output_distance -> output plane.
    ``input_distance`` and ``output_distance`` default to the layer spacing.
    """

    layers: List[PhaseLayer]
    geometry: PropagationGeometry = field(default_factory=PropagationGeometry)
    input_distance: Optional[float] = None
    output_distance: Optional[float] = None

    def __post_init__(self):
        if self.input_distance is None:
            self.input_distance = self.geometry.layer_spacing
        if self.output_distance is None:
            self.output_distance = self.geometry.layer_spacing
        sizes = {layer.grid_size for layer in self.layers}
        if len(sizes) > 1:
            raise ShapeError(f"all layers must share one grid size, got {sorted(sizes)}")

    def __repr__(self) -> str:
        return (f"DiffractiveNetwork(layers={self.num_layers}, grid={self.grid_size}, "
                f"spacing={self.geometry.layer_spacing})")

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def grid_size(self) -> Optional[int]:
        return self.layers[0].grid_size if self.layers else None

    @property
    def total_distance(self) -> float:
        spacing = self.geometry.layer_spacing * max(self.num_layers - 1, 0)
        return self.input_distance + spacing + self.output_distance

    def parameters(self, prefix: str = '') -> Dict[str, np.ndarray]:
        """Trainable phase arrays keyed by name (the arrays themselves, not copies)."""
        return {
            f"{prefix}layer{index}": layer.phase
            for index, layer in enumerate(self.layers)
            if layer.trainable
        }

    def copy(self) -> 'DiffractiveNetwork':
        return copy.deepcopy(self)

    @classmethod
    def create(cls, grid_size: int, num_layers: int, geometry: PropagationGeometry,
               rng: np.random.Generator, phase_std: float = 0.2 * np.pi,
               input_distance: Optional[float] = None,
               output_distance: Optional[float] = None) -> 'DiffractiveNetwork':
        """Build a network with Gaussian(0, phase_std) phase initialisation."""
        layers = [PhaseLayer.gaussian(grid_size, rng, phase_std) for _ in range(num_layers)]
        return cls(layers, geometry, input_distance, output_distance)

    def forward(self, input_field: ComplexField,
                stages: Optional[CapturedStages] = None) -> ComplexField:
        return forward(self, input_field, stages)


def forward(network: DiffractiveNetwork, input_field: ComplexField,
            stages: Optional[CapturedStages] = None) -> ComplexField:
    """Propagate an input field through the network to its output plane.

    Args:
        network: Network to evaluate (not modified)
        input_field: Field at the input plane, shape (..., N, N)
        stages: When given, intermediate fields are recorded into it for
            :func:`adjoint_backward`

    Returns:
        Complex field at the output plane
    """
    if network.grid_size is not None and network.grid_size != input_field.grid_size:
        raise ShapeError(
            f"input grid {input_field.grid_size} does not match network grid {network.grid_size}"
        )
    input_field.check_finite()

    geometry = network.geometry
    pitch = input_field.pitch
    dtype = input_field.values.dtype

    if stages is not None:
        stages.clear()
        stages.input = input_field.values

    current = propagate_values(input_field.values, pitch, network.input_distance, geometry)
    for index, layer in enumerate(network.layers):
        if stages is not None:
            stages.arriving.append(current)
        current = current * layer.transmittance(dtype)
        if stages is not None:
            stages.modulated.append(current)
        distance = (network.output_distance if index == network.num_layers - 1
                    else geometry.layer_spacing)
        current = propagate_values(current, pitch, distance, geometry)

    if not network.layers:
        current = propagate_values(current, pitch, network.output_distance, geometry)

    if stages is not None:
        stages.output = current
    return input_field.with_values(current)


def adjoint_backward(network: DiffractiveNetwork, output_gradient: ComplexField,
                     stages: Optional[CapturedStages]) -> Tuple[ComplexField, List[np.ndarray]]:
    """Back-propagate an output cotangent through the network.

    The cotangent convention is dLoss/d(conj u). Propagation adjoints use the
    conjugated transfer function; the gradient of layer j is
    2*Im(conj(b_j) * c_j), with b_j the field leaving the layer and c_j its
    cotangent, summed over any batch axes.

    Args:
        network: Network used for the forward pass
        output_gradient: Cotangent of the output-plane field
        stages: Stages captured by :func:`forward`

    Returns:
        Tuple of (input-plane cotangent, per-layer phase gradients)

    Raises:
        StateError: If the forward pass did not capture its stages
        ShapeError: If the cotangent does not match the captured output
    """
    if stages is None or not stages.complete or len(stages.modulated) != network.num_layers:
        raise StateError("adjoint_backward requires stages captured by forward()")
    cotangent = np.asarray(output_gradient.values)
    if cotangent.shape != stages.output.shape:
        raise ShapeError(
            f"output cotangent shape {cotangent.shape} does not match "
            f"captured output shape {stages.output.shape}"
        )
    check_square_grid(cotangent, 'output cotangent')

    geometry = network.geometry
    pitch = output_gradient.pitch
    batch_axes = tuple(range(cotangent.ndim - 2))
    gradients: List[Optional[np.ndarray]] = [None] * network.num_layers

    current = cotangent
    if not network.layers:
        current = propagate_values(current, pitch, network.output_distance, geometry,
                                   conjugate=True)
    for index in range(network.num_layers - 1, -1, -1):
        layer = network.layers[index]
        distance = (network.output_distance if index == network.num_layers - 1
                    else geometry.layer_spacing)
        current = propagate_values(current, pitch, distance, geometry, conjugate=True)
        leaving = stages.modulated[index]
        grad = 2.0 * np.imag(np.conj(leaving) * current)
        gradients[index] = grad.sum(axis=batch_axes) if batch_axes else grad
        current = current * np.conj(layer.transmittance(current.dtype))

    current = propagate_values(current, pitch, network.input_distance, geometry,
                               conjugate=True)
    return output_gradient.with_values(current), [
        np.asarray(grad, dtype=np.float64) for grad in gradients
    ]
