"""Exception types raised by the diffractive classifier toolkit.

Each error also derives from the builtin that callers would naturally catch,
so ``except ValueError`` keeps working for validation failures.
"""

from typing import Optional


class DiffractiveError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(DiffractiveError, ValueError):
    """Grid shapes are non-square or do not match each other."""


class NumericError(DiffractiveError, ArithmeticError):
    """Non-finite values in fields, scores or the training loss."""

    def __init__(self, message: str, batch_index: Optional[int] = None):
        super().__init__(message)
        self.batch_index = batch_index


class LayoutError(DiffractiveError, ValueError):
    """Detector regions are misplaced, overlapping or inconsistent."""


class NotationError(DiffractiveError, ValueError):
    """Architecture notation could not be parsed or validated."""

    def __init__(self, message: str, position: Optional[int] = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class ConfigError(DiffractiveError, ValueError):
    """Invalid configuration or experiment setup."""


class DataFormatError(DiffractiveError, ValueError):
    """Malformed dataset, layout or checkpoint file."""

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class StateError(DiffractiveError, RuntimeError):
    """An operation was called in the wrong state (e.g. no captured stages)."""
