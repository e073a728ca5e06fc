"""Training hyperparameters and their epoch schedules."""

import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict

from ..exceptions import ConfigError

TEMPERATURE_SCHEDULES = ('constant', 'exp_growth')


@dataclass
class TrainConfig:
    """Optimisation settings shared by every repetition of an experiment.

    The learning rate at (zero-based) epoch e is
    ``lr_initial * lr_decay_factor ** (e // lr_decay_every)``; with the
    ``exp_growth`` schedule the temperature is
    ``temperature_initial * temperature_growth_factor ** (e // temperature_growth_every)``.
    """

    epochs: int = 50
    batch_size: int = 32
    lr_initial: float = 0.001
    lr_decay_factor: float = 0.7
    lr_decay_every: int = 8
    temperature_initial: float = 0.1
    temperature_schedule: str = 'constant'
    temperature_growth_every: int = 25
    temperature_growth_factor: float = math.e
    repetitions: int = 6
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    workers: int = 1
    network_workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Raise ConfigError for any out-of-range setting."""
        for name in ('epochs', 'batch_size', 'lr_decay_every', 'temperature_growth_every',
                     'repetitions', 'workers', 'network_workers'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value}")
        if self.lr_initial < 0:
            raise ConfigError(f"lr_initial must be non-negative, got {self.lr_initial}")
        if not 0 < self.lr_decay_factor <= 1:
            raise ConfigError(f"lr_decay_factor must lie in (0, 1], got {self.lr_decay_factor}")
        if not self.temperature_initial > 0:
            raise ConfigError(f"temperature_initial must be positive, got {self.temperature_initial}")
        if not self.temperature_growth_factor > 0:
            raise ConfigError(
                f"temperature_growth_factor must be positive, got {self.temperature_growth_factor}"
            )
        if self.temperature_schedule not in TEMPERATURE_SCHEDULES:
            raise ConfigError(
                f"temperature_schedule must be one of {TEMPERATURE_SCHEDULES}, "
                f"got {self.temperature_schedule!r}"
            )
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.epsilon > 0):
            raise ConfigError("Adam betas must lie in [0, 1) and epsilon must be positive")

    def learning_rate(self, epoch: int) -> float:
        return self.lr_initial * self.lr_decay_factor ** (epoch // self.lr_decay_every)

    def temperature(self, epoch: int) -> float:
        if self.temperature_schedule == 'constant':
            return self.temperature_initial
        return (self.temperature_initial
                * self.temperature_growth_factor ** (epoch // self.temperature_growth_every))

    def to_dict(self) -> Dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict) -> 'TrainConfig':
        """Build from a dictionary, rejecting keys that are not settings."""
        known = {item.name for item in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown training settings: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, json_str: str) -> 'TrainConfig':
        return cls.from_dict(json.loads(json_str))
