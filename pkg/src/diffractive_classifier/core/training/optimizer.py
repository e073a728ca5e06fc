"""Adam optimiser over named numpy parameter arrays, and the training state."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np


class Adam:
    """Adam with bias-corrected moments, updating parameter arrays in place."""

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray],
             lr: float) -> None:
        """Apply one update to every parameter that has a gradient.

        Args:
            params: Named parameter arrays (modified in place)
            grads: Gradients with the same names and shapes
            lr: Learning rate for this step
        """
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t

        for name in sorted(params):
            if name not in grads:
                continue
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(params[name])
                self.v[name] = np.zeros_like(params[name])

            self.m[name] *= self.beta1
            self.m[name] += (1.0 - self.beta1) * g
            self.v[name] *= self.beta2
            self.v[name] += (1.0 - self.beta2) * (g * g)

            if lr == 0:
                continue
            denom = np.sqrt(self.v[name] / bc2) + self.epsilon
            params[name] -= (lr / bc1) * self.m[name] / denom

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """Moments keyed ``adam.m.<name>`` / ``adam.v.<name>`` for checkpoints."""
        arrays = {}
        for name in sorted(self.m):
            arrays[f"adam.m.{name}"] = self.m[name]
            arrays[f"adam.v.{name}"] = self.v[name]
        return arrays

    def load_state_arrays(self, arrays: Dict[str, np.ndarray], step: int) -> None:
        self.m = {key[len('adam.m.'):]: value.copy() for key, value in arrays.items()
                  if key.startswith('adam.m.')}
        self.v = {key[len('adam.v.'):]: value.copy() for key, value in arrays.items()
                  if key.startswith('adam.v.')}
        self.t = int(step)


@dataclass
class TrainState:
    """Mutable state carried from epoch to epoch.

    Attributes:
        optimizer: Adam moments and step counter
        epoch: Number of completed epochs
        lr: Learning rate used by the last epoch
        temperature: Temperature used by the last epoch
        history: One record per epoch and split
        best_epoch: Epoch with the best validation accuracy so far
        best_val_accuracy: That accuracy
        best_parameters: Copies of the parameters at ``best_epoch``
    """

    optimizer: Adam = field(default_factory=Adam)
    epoch: int = 0
    lr: Optional[float] = None
    temperature: Optional[float] = None
    history: List[Dict] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_val_accuracy: float = -1.0
    best_parameters: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def create(cls, beta1: float = 0.9, beta2: float = 0.999,
               epsilon: float = 1e-8) -> 'TrainState':
        return cls(optimizer=Adam(beta1, beta2, epsilon))

    def record_best(self, epoch: int, val_accuracy: float,
                    params: Dict[str, np.ndarray]) -> bool:
        """Snapshot ``params`` if ``val_accuracy`` beats the best so far (earliest wins ties)."""
        if val_accuracy <= self.best_val_accuracy:
            return False
        self.best_epoch = epoch
        self.best_val_accuracy = val_accuracy
        self.best_parameters = {name: value.copy() for name, value in params.items()}
        return True
