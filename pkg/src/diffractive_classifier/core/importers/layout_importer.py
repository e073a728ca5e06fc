"""JSON importer for detector layout override files."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..detection.layout import DetectorLayout, DetectorRegion
from ..exceptions import DataFormatError, LayoutError


class LayoutImporter:
    """Imports detector layouts from JSON files.

    Supported structures:
    - {"layouts": [{"plane_id": 0, "regions": [...]}, ...]}
    - [{"plane_id": 0, "regions": [...]}, ...]
    - {"regions": [{"plane_id": 0, "class_id": 3, ...}, ...]} (flat region list)
    """

    @staticmethod
    def import_file(file_path: Path, grid_size: Optional[int] = None,
                    pitch: Optional[float] = None) -> List[DetectorLayout]:
        """
        Import and validate detector layouts.

        Args:
            file_path: Path to the JSON file
            grid_size: Grid to validate the regions against (skipped when None)
            pitch: Sample spacing of that grid

        Returns:
            Layouts sorted by plane id

        Raises:
            FileNotFoundError: If file doesn't exist
            DataFormatError: If the JSON cannot be parsed
            LayoutError: If a region is malformed or misplaced (the message names it)
        """
        file_path = Path(file_path)
        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")

        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{file_path}: invalid JSON: {exc.msg}", exc.pos) from exc

        layouts = LayoutImporter._extract_layouts(data)
        if not layouts:
            raise LayoutError(f"No detector layouts found in {file_path}")
        for layout in layouts:
            layout.validate(grid_size, pitch)
        return layouts

    @staticmethod
    def _region(item: Any, plane_id: int, index: int) -> DetectorRegion:
        try:
            return DetectorRegion.from_dict(item)
        except (KeyError, TypeError, ValueError) as exc:
            raise LayoutError(f"region {index} on plane {plane_id} is malformed: {exc}") from exc

    @staticmethod
    def _extract_layouts(data: Any) -> List[DetectorLayout]:
        if isinstance(data, dict) and 'layouts' in data:
            entries = data['layouts']
        elif isinstance(data, list):
            entries = data
        elif isinstance(data, dict) and 'regions' in data:
            planes: Dict[int, List] = {}
            for item in data['regions']:
                planes.setdefault(int(item.get('plane_id', 0)), []).append(item)
            entries = [{'plane_id': plane, 'regions': items} for plane, items in planes.items()]
        else:
            return []

        layouts = []
        for entry in entries:
            plane_id = int(entry.get('plane_id', len(layouts)))
            regions = [LayoutImporter._region(item, plane_id, index)
                       for index, item in enumerate(entry.get('regions', []))]
            layouts.append(DetectorLayout(plane_id, regions))
        layouts.sort(key=lambda layout: layout.plane_id)
        plane_ids = [layout.plane_id for layout in layouts]
        if plane_ids != list(range(len(layouts))):
            raise LayoutError(f"plane ids must be 0..{len(layouts) - 1}, got {plane_ids}")
        return layouts
