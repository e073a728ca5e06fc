"""Systems of jointly trained, optically isolated diffractive networks."""

import copy
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .notation import ArchitectureSpec
from ..detection.layout import (
    DEFAULT_DETECTOR_WIDTH,
    DetectorLayout,
    differential_layout,
    grid_layout,
)
from ..detection.scores import (
    ClassScores,
    DetectorCoefficients,
    differential_backward,
    differential_scores,
    generalized_backward,
    generalized_scores,
    nondifferential_backward,
    nondifferential_scores,
)
from ..exceptions import ConfigError, LayoutError, ShapeError
from ..optics.field import ComplexField, PropagationGeometry
from ..optics.network import CapturedStages, DiffractiveNetwork, adjoint_backward, forward

logger = logging.getLogger(__name__)

Route = Tuple[int, int]


@dataclass
class SystemPass:
    """Everything a forward pass produced that the backward pass needs."""

    outputs: List[ComplexField]
    signals: List[np.ndarray]
    stages: List[Optional[CapturedStages]]
    positive: np.ndarray
    negative: Optional[np.ndarray]
    scores: ClassScores


@dataclass
class NetworkSystem:
    """Networks, detector layouts and the routing of detectors to classes.

    ``layouts[i]`` sits on the output plane of ``networks[i]``; no field
    ever crosses from one network to another.
    """

    spec: ArchitectureSpec
    networks: List[DiffractiveNetwork]
    layouts: List[DetectorLayout]
    pitch: float
    coefficients: Optional[DetectorCoefficients] = None
    class_order: Optional[List[int]] = None
    _routes: Dict[str, List[Route]] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.spec.num_classes is None:
            raise ConfigError("network systems need the number of classes bound to the architecture")
        if len(self.networks) != self.spec.n_networks:
            raise ConfigError(
                f"{self.spec.render()} needs {self.spec.n_networks} networks, got {len(self.networks)}"
            )
        if len(self.layouts) != len(self.networks):
            raise LayoutError(
                f"{len(self.layouts)} detector layouts for {len(self.networks)} networks"
            )
        for layout in self.layouts:
            layout.validate(self.grid_size, self.pitch)
        self._routes = self._build_routes()

    def __repr__(self) -> str:
        return (f"NetworkSystem({self.spec.render()}, M={self.num_classes}, "
                f"grid={self.grid_size})")

    @property
    def num_classes(self) -> int:
        return self.spec.num_classes

    @property
    def grid_size(self) -> int:
        return self.spec.grid_size

    @property
    def geometry(self) -> PropagationGeometry:
        return self.networks[0].geometry

    def _build_routes(self) -> Dict[str, List[Route]]:
        """Map each class to the (network, region) pairs feeding its score.

        Raises:
            LayoutError: If a class lacks a detector or has more than one of a sign
        """
        wanted = ('positive', 'negative') if self.spec.differential else ('single',)
        found: Dict[str, Dict[int, List[Route]]] = {sign: {} for sign in wanted}
        for network_index, layout in enumerate(self.layouts):
            for region_index, region in enumerate(layout.regions):
                if region.sign not in found:
                    raise LayoutError(
                        f"{layout.describe_region(region_index)} has sign {region.sign!r}, "
                        f"expected one of {wanted} for {self.spec.render()}"
                    )
                if region.class_id >= self.num_classes:
                    raise LayoutError(
                        f"{layout.describe_region(region_index)} refers to a class outside "
                        f"0..{self.num_classes - 1}"
                    )
                found[region.sign].setdefault(region.class_id, []).append(
                    (network_index, region_index))

        routes = {}
        for sign in wanted:
            per_class = []
            for class_id in range(self.num_classes):
                sources = found[sign].get(class_id, [])
                if len(sources) != 1:
                    raise LayoutError(
                        f"class {class_id} needs exactly one {sign} detector, found {len(sources)}"
                    )
                per_class.append(sources[0])
            routes[sign] = per_class
        return routes

    def parameters(self) -> Dict[str, np.ndarray]:
        """Every trainable array, keyed by a stable name."""
        params: Dict[str, np.ndarray] = {}
        for index, network in enumerate(self.networks):
            params.update(network.parameters(prefix=f"net{index}."))
        if self.coefficients is not None:
            params.update(self.coefficients.parameters())
        return params

    def copy(self) -> 'NetworkSystem':
        return copy.deepcopy(self)

    def route_signals(self, signals: Sequence[np.ndarray]) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Gather per-network detector signals into per-class vectors.

        Returns:
            (I_+ or I_m, I_- or None), each of shape (..., M)
        """
        def gather(routes: List[Route]) -> np.ndarray:
            return np.stack([signals[net][..., region] for net, region in routes], axis=-1)

        if self.spec.differential:
            return gather(self._routes['positive']), gather(self._routes['negative'])
        return gather(self._routes['single']), None

    def scores_from_signals(self, signals: Sequence[np.ndarray],
                            temperature: float = 1.0) -> ClassScores:
        positive, negative = self.route_signals(signals)
        return self._scores(positive, negative, temperature)

    def _scores(self, positive: np.ndarray, negative: Optional[np.ndarray],
                temperature: float) -> ClassScores:
        if negative is None:
            return nondifferential_scores(positive, temperature)
        if self.coefficients is not None:
            return generalized_scores(positive, negative, self.coefficients, temperature)
        return differential_scores(positive, negative, temperature)

    def run(self, input_field: ComplexField, temperature: float = 1.0,
            capture: bool = False, max_workers: int = 1) -> SystemPass:
        """Forward every network on the same input and score the result.

        Args:
            input_field: Field shared by all networks, shape (..., N, N)
            temperature: T used for the scaled scores
            capture: Record intermediate stages for :meth:`backward`
            max_workers: Evaluate networks on a thread pool of this size;
                results are identical to sequential evaluation
        """
        if input_field.grid_size != self.grid_size:
            raise ShapeError(
                f"input grid {input_field.grid_size} does not match system grid {self.grid_size}"
            )
        if not np.isclose(input_field.pitch, self.pitch):
            raise ShapeError(f"input pitch {input_field.pitch} does not match system pitch {self.pitch}")

        def run_one(index: int):
            stages = CapturedStages() if capture else None
            output = forward(self.networks[index], input_field, stages)
            signals = self.layouts[index].read(output.intensity(), output.pitch)
            return output, signals, stages

        indices = range(len(self.networks))
        if max_workers > 1 and len(self.networks) > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                results = list(pool.map(run_one, indices))
        else:
            results = [run_one(index) for index in indices]

        outputs = [result[0] for result in results]
        signals = [result[1] for result in results]
        stages = [result[2] for result in results]
        positive, negative = self.route_signals(signals)
        scores = self._scores(positive, negative, temperature)
        return SystemPass(outputs, signals, stages, positive, negative, scores)

    def backward(self, system_pass: SystemPass, raw_gradient: np.ndarray,
                 max_workers: int = 1) -> Dict[str, np.ndarray]:
        """Gradients of every trainable parameter given dLoss/draw.

        Batch axes are summed; the returned keys match :meth:`parameters`.
        """
        raw_gradient = np.asarray(raw_gradient, dtype=np.float64)
        gradients: Dict[str, np.ndarray] = {}
        signal_grads = [np.zeros_like(signals) for signals in system_pass.signals]

        def scatter(routes: List[Route], class_grad: np.ndarray) -> None:
            for class_id, (net, region) in enumerate(routes):
                signal_grads[net][..., region] += class_grad[..., class_id]

        positive, negative = system_pass.positive, system_pass.negative
        if negative is None:
            scatter(self._routes['single'], nondifferential_backward(positive, raw_gradient))
        elif self.coefficients is not None:
            grad_pos, grad_neg, grad_p, grad_n = generalized_backward(
                positive, negative, self.coefficients, raw_gradient)
            scatter(self._routes['positive'], grad_pos)
            scatter(self._routes['negative'], grad_neg)
            if grad_p is not None:
                gradients['coefficients.p'] = grad_p
                gradients['coefficients.n'] = grad_n
        else:
            grad_pos, grad_neg = differential_backward(positive, negative, raw_gradient)
            scatter(self._routes['positive'], grad_pos)
            scatter(self._routes['negative'], grad_neg)

        def back_one(index: int) -> List[np.ndarray]:
            output = system_pass.outputs[index]
            intensity_grad = self.layouts[index].intensity_gradient(
                signal_grads[index], self.grid_size, self.pitch)
            cotangent = output.with_values(intensity_grad * output.values)
            _, layer_grads = adjoint_backward(self.networks[index], cotangent,
                                              system_pass.stages[index])
            return layer_grads

        indices = range(len(self.networks))
        if max_workers > 1 and len(self.networks) > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                per_network = list(pool.map(back_one, indices))
        else:
            per_network = [back_one(index) for index in indices]

        for index, layer_grads in enumerate(per_network):
            network = self.networks[index]
            for layer_index, grad in enumerate(layer_grads):
                if network.layers[layer_index].trainable:
                    gradients[f"net{index}.layer{layer_index}"] = grad
        return gradients

    def output_intensities(self, input_field: ComplexField) -> List[np.ndarray]:
        """Output-plane intensity of every network."""
        return [output.intensity() for output in self.run(input_field).outputs]


def default_layouts(spec: ArchitectureSpec, grid_size: int, pitch: float,
                    width: float = DEFAULT_DETECTOR_WIDTH,
                    class_order: Optional[Sequence[int]] = None) -> List[DetectorLayout]:
    """Detector layouts for every network of a spec, in network order.

    Split designs list all positive planes (one per class group) followed
    by all negative planes; each negative plane repeats the coordinates of
    its positive partner.
    """
    groups = spec.class_groups(class_order)
    if not spec.differential:
        return [grid_layout(classes, grid_size, pitch, width, plane_id=index)
                for index, classes in enumerate(groups)]
    if not spec.split_planes:
        return [differential_layout(classes, grid_size, pitch, width, plane_id=index)
                for index, classes in enumerate(groups)]
    positives = [grid_layout(classes, grid_size, pitch, width, plane_id=index, sign='positive')
                 for index, classes in enumerate(groups)]
    negatives = [grid_layout(classes, grid_size, pitch, width,
                             plane_id=spec.n_groups + index, sign='negative')
                 for index, classes in enumerate(groups)]
    return positives + negatives


def instantiate(spec: ArchitectureSpec, geometry: Optional[PropagationGeometry] = None,
                seed: int = 0, pitch: float = 0.5,
                layouts: Optional[List[DetectorLayout]] = None,
                detector_width: float = DEFAULT_DETECTOR_WIDTH,
                class_order: Optional[Sequence[int]] = None,
                num_classes: Optional[int] = None,
                input_distance: Optional[float] = None,
                output_distance: Optional[float] = None,
                phase_std: float = 0.2 * np.pi) -> NetworkSystem:
    """Build a freshly initialised system for a spec.

    Every network draws its Gaussian(0, phase_std) phases from its own child
    of ``SeedSequence(seed)``, so the same seed always yields the same system.

    Args:
        spec: Architecture; its class count is taken from ``num_classes``
            when not already bound
        geometry: Propagation geometry shared by all networks
        seed: Seed for phase and coefficient initialisation
        pitch: Sample spacing on every plane
        layouts: Detector layouts (default layouts when omitted)
        detector_width: Width of default detectors
        class_order: Permutation deciding which classes share a network
        num_classes: Dataset class count M
        input_distance: Input plane to first layer (default: layer spacing)
        output_distance: Last layer to output plane (default: layer spacing)
        phase_std: Standard deviation of the initial phases

    Raises:
        ConfigError: P not a perfect square, or M inconsistent with the architecture
    """
    if num_classes is not None and spec.num_classes != num_classes:
        spec = spec.with_classes(num_classes)
    if spec.num_classes is None:
        raise ConfigError("the number of classes must be supplied by the dataset")
    geometry = geometry or PropagationGeometry()
    grid_size = spec.grid_size

    children = np.random.SeedSequence(seed).spawn(spec.n_networks + 1)
    networks = [
        DiffractiveNetwork.create(grid_size, spec.layers_per_network, geometry,
                                  np.random.default_rng(child), phase_std,
                                  input_distance, output_distance)
        for child in children[:-1]
    ]

    coefficients = None
    if spec.learnable_coefficients:
        coefficients = DetectorCoefficients.random(spec.num_classes,
                                                   np.random.default_rng(children[-1]))

    if layouts is None:
        layouts = default_layouts(spec, grid_size, pitch, detector_width, class_order)

    order = None if class_order is None else [int(c) for c in class_order]
    system = NetworkSystem(spec, networks, layouts, pitch, coefficients, order)
    logger.info("Instantiated %s with %d classes on a %dx%d grid (seed %d)",
                spec.render(), spec.num_classes, grid_size, grid_size, seed)
    return system


def system_forward(system: NetworkSystem, input_field: ComplexField,
                   temperature: float = 1.0, max_workers: int = 1) -> ClassScores:
    """Class scores of a system for one input (or a batch of inputs)."""
    return system.run(input_field, temperature, max_workers=max_workers).scores

