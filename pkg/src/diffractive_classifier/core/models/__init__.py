"""Data models for labeled images and dataset splits."""

from .labeled_image import LabeledImage, ImageSet, DatasetSplits, Dataset

__all__ = ['LabeledImage', 'ImageSet', 'DatasetSplits', 'Dataset']
