"""Persistence of checkpoints, metrics, comparison tables and field dumps."""

from .atomic import OutputLock, atomic_write
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .field_dump import dump_field, dump_stages, read_raw
from .layout_exporter import save_layouts
from .metrics_log import MetricsLog, read_metrics
from .table_exporter import ComparisonTableExporter

__all__ = [
    'OutputLock',
    'atomic_write',
    'Checkpoint',
    'load_checkpoint',
    'save_checkpoint',
    'dump_field',
    'dump_stages',
    'read_raw',
    'save_layouts',
    'MetricsLog',
    'read_metrics',
    'ComparisonTableExporter',
]
