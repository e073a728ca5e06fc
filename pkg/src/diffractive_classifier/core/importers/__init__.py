"""Data import modules for dataset and layout files."""

from .idx_importer import IDXImporter, load_idx
from .cifar_importer import CIFARImporter, load_cifar10
from .dataset_loader import DatasetScanner, load_dataset, resolve_data_root
from .layout_importer import LayoutImporter

__all__ = [
    'IDXImporter',
    'load_idx',
    'CIFARImporter',
    'load_cifar10',
    'DatasetScanner',
    'load_dataset',
    'resolve_data_root',
    'LayoutImporter',
]
