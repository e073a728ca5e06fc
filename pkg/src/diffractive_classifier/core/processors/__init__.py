"""Data processing modules: input encoding and run statistics."""

from .encoding import EncodingSpec, encode, encode_pixels, decode, to_grayscale
from .statistics import StatisticsEngine, StatisticalTest, RepetitionSummary

__all__ = [
    'EncodingSpec',
    'encode',
    'encode_pixels',
    'decode',
    'to_grayscale',
    'StatisticsEngine',
    'StatisticalTest',
    'RepetitionSummary',
]
