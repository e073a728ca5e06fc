"""Architecture notation D([Q+,Q-],[N,L,P]) and its parsed form.

Accepted forms (whitespace anywhere is ignored)::

    D([Q+,Q-],[N,L,P])        detectors share each output plane
    D([Q+][Q-],[2N,L,P])      positive and negative detectors on separate planes
    D(p[Q+] n[Q-],[2N,L,P])   separate planes with learnable coefficients p_m, n_m

P may carry a ``k`` suffix meaning thousands ("40k" == 40000).
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence

from ..exceptions import ConfigError, NotationError

FAMILY_ORDER = ('non-differential', 'differential', 'split differential')


@dataclass(frozen=True)
class ArchitectureSpec:
    """Parsed architecture notation.

    Attributes:
        q_pos: Positive (or single) detectors per class group
        q_neg: Negative detectors per class group, 0 when non-differential
        split_planes: Positive and negative detectors on different networks
        n_networks: Total network count (2N for split designs)
        layers_per_network: L
        neurons_per_layer: P
        learnable_coefficients: Train per-class p_m, n_m
        num_classes: M, supplied by the dataset (None until bound)
    """

    q_pos: int
    q_neg: int
    split_planes: bool
    n_networks: int
    layers_per_network: int
    neurons_per_layer: int
    learnable_coefficients: bool = False
    num_classes: Optional[int] = None

    def __post_init__(self):
        for name in ('q_pos', 'n_networks', 'layers_per_network', 'neurons_per_layer'):
            if getattr(self, name) < 1:
                raise NotationError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.q_neg < 0:
            raise NotationError(f"q_neg must be non-negative, got {self.q_neg}")
        if self.q_neg not in (0, self.q_pos):
            raise NotationError(
                f"differential designs need one negative detector per positive one, "
                f"got [{self.q_pos},{self.q_neg}]"
            )
        if self.split_planes:
            if self.q_neg == 0:
                raise NotationError("split-plane designs must be differential")
            if self.n_networks % 2:
                raise NotationError(
                    f"split-plane designs need an even network count, got {self.n_networks}"
                )
        if self.learnable_coefficients and self.q_neg == 0:
            raise NotationError("learnable detector coefficients need a differential design")
        if self.num_classes is not None:
            self._check_classes(self.num_classes)

    @property
    def differential(self) -> bool:
        return self.q_neg > 0

    @property
    def n_groups(self) -> int:
        """Number of class groups N."""
        return self.n_networks // 2 if self.split_planes else self.n_networks

    @property
    def family(self) -> str:
        if not self.differential:
            return 'non-differential'
        return 'split differential' if self.split_planes else 'differential'

    @property
    def grid_size(self) -> int:
        """Grid side length sqrt(P).

        Raises:
            ConfigError: If P is not a perfect square
        """
        side = math.isqrt(self.neurons_per_layer)
        if side * side != self.neurons_per_layer:
            raise ConfigError(
                f"neurons per layer must be a perfect square, got {self.neurons_per_layer}"
            )
        return side

    @property
    def total_neurons(self) -> int:
        return self.n_networks * self.layers_per_network * self.neurons_per_layer

    def _check_classes(self, num_classes: int) -> None:
        if num_classes < 1:
            raise ConfigError(f"number of classes must be positive, got {num_classes}")
        if num_classes % self.n_groups:
            raise ConfigError(
                f"{num_classes} classes cannot be split into {self.n_groups} equal groups "
                f"({num_classes} mod {self.n_groups} = {num_classes % self.n_groups})"
            )
        per_group = num_classes // self.n_groups
        if self.q_pos != per_group:
            raise ConfigError(
                f"{render(self)} places {self.q_pos} detector(s) per group but each of the "
                f"{self.n_groups} groups serves {per_group} of {num_classes} classes"
            )

    def with_classes(self, num_classes: int) -> 'ArchitectureSpec':
        """Bind the dataset's class count, validating the group arithmetic."""
        return replace(self, num_classes=int(num_classes))

    def class_groups(self, class_order: Optional[Sequence[int]] = None) -> List[List[int]]:
        """Classes served by each group, as contiguous chunks of ``class_order``."""
        if self.num_classes is None:
            raise ConfigError("number of classes is not bound; call with_classes() first")
        order = list(range(self.num_classes)) if class_order is None else [int(c) for c in class_order]
        if sorted(order) != list(range(self.num_classes)):
            raise ConfigError(
                f"class order must be a permutation of 0..{self.num_classes - 1}, got {order}"
            )
        size = self.num_classes // self.n_groups
        return [order[index * size:(index + 1) * size] for index in range(self.n_groups)]

    def class_assignment(self, class_order: Optional[Sequence[int]] = None) -> Dict[int, int]:
        """class_id -> index of the network holding its positive (or single) detector."""
        return {class_id: group
                for group, classes in enumerate(self.class_groups(class_order))
                for class_id in classes}

    def negative_assignment(self, class_order: Optional[Sequence[int]] = None) -> Dict[int, int]:
        """class_id -> network holding its negative detector (empty if non-differential)."""
        if not self.differential:
            return {}
        offset = self.n_groups if self.split_planes else 0
        return {class_id: network + offset
                for class_id, network in self.class_assignment(class_order).items()}

    def render(self) -> str:
        return render(self)

    def to_dict(self) -> Dict:
        return {'notation': render(self), 'num_classes': self.num_classes,
                'learnable_coefficients': self.learnable_coefficients}

    @classmethod
    def from_dict(cls, data: Dict) -> 'ArchitectureSpec':
        spec = parse_notation(data['notation'])
        if data.get('learnable_coefficients') and not spec.learnable_coefficients:
            spec = replace(spec, learnable_coefficients=True)
        if data.get('num_classes') is not None:
            spec = spec.with_classes(data['num_classes'])
        return spec


class _Cursor:
    """Character cursor that skips whitespace and reports original positions."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ''

    def expect(self, char: str) -> None:
        found = self.peek()
        if found.lower() != char.lower():
            shown = repr(found) if found else 'end of text'
            raise NotationError(f"expected {char!r}, found {shown}", self.pos)
        self.pos += 1

    def integer(self, allow_k: bool = False) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            found = self.peek()
            raise NotationError(f"expected an integer, found {found!r}" if found
                                else "expected an integer, found end of text", start)
        value = int(self.text[start:self.pos])
        if allow_k and self.pos < len(self.text) and self.text[self.pos] in 'kK':
            self.pos += 1
            value *= 1000
        return value

    def bracketed(self) -> int:
        self.expect('[')
        value = self.integer()
        self.expect(']')
        return value

    def done(self) -> None:
        self.skip()
        if self.pos != len(self.text):
            raise NotationError(f"unexpected trailing text {self.text[self.pos:]!r}", self.pos)


def parse_notation(text: str, num_classes: Optional[int] = None) -> ArchitectureSpec:
    """Parse an architecture string such as ``"D([10,10],[1,5,40k])"``.

    Args:
        text: Notation string
        num_classes: Dataset class count M; when given, the group arithmetic
            is validated

    Returns:
        Parsed ArchitectureSpec

    Raises:
        NotationError: Malformed text (with the character position)
        ConfigError: M not divisible by the group count, or detector counts
            inconsistent with M/N
    """
    cursor = _Cursor(text)
    cursor.expect('D')
    cursor.expect('(')

    learnable = False
    head = cursor.peek()
    if head.lower() == 'p':
        cursor.pos += 1
        q_pos = cursor.bracketed()
        cursor.expect('n')
        q_neg = cursor.bracketed()
        split, learnable = True, True
    else:
        cursor.expect('[')
        q_pos = cursor.integer()
        if cursor.peek() == ',':
            cursor.pos += 1
            q_neg = cursor.integer()
            cursor.expect(']')
            split = False
        else:
            cursor.expect(']')
            q_neg = cursor.bracketed()
            split = True

    cursor.expect(',')
    cursor.expect('[')
    n_networks = cursor.integer()
    cursor.expect(',')
    layers = cursor.integer()
    cursor.expect(',')
    neurons = cursor.integer(allow_k=True)
    cursor.expect(']')
    cursor.expect(')')
    cursor.done()

    return ArchitectureSpec(q_pos, q_neg, split, n_networks, layers, neurons,
                            learnable_coefficients=learnable, num_classes=num_classes)


def _render_count(value: int) -> str:
    if value >= 1000 and value % 1000 == 0:
        return f"{value // 1000}k"
    return str(value)


def render(spec: ArchitectureSpec) -> str:
    """Canonical notation string (no whitespace, ``k`` suffix when exact)."""
    if spec.learnable_coefficients and spec.split_planes:
        detectors = f"p[{spec.q_pos}]n[{spec.q_neg}]"
    elif spec.split_planes:
        detectors = f"[{spec.q_pos}][{spec.q_neg}]"
    else:
        detectors = f"[{spec.q_pos},{spec.q_neg}]"
    return (f"D({detectors},[{spec.n_networks},{spec.layers_per_network},"
            f"{_render_count(spec.neurons_per_layer)}])")
