"""JSON export of detector layouts, readable by LayoutImporter."""

import json
from pathlib import Path
from typing import Sequence

from .atomic import atomic_write
from ..detection.layout import DetectorLayout


def save_layouts(layouts: Sequence[DetectorLayout], path: Path) -> Path:
    """Write layouts in the ``{"layouts": [...]}`` form."""
    text = json.dumps({'layouts': [layout.to_dict() for layout in layouts]}, indent=2)
    return atomic_write(path, text + '\n')
