"""Line-delimited ``key=value`` metrics logs."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List

import pandas as pd

from .atomic import atomic_write
from ..exceptions import DataFormatError

logger = logging.getLogger(__name__)


def format_record(record: Dict[str, Any]) -> str:
    """One record as ``key=value`` pairs separated by spaces.

    Floats use ``repr`` so they read back exactly.
    """
    parts = []
    for key, value in record.items():
        if ' ' in str(key) or '=' in str(key):
            raise ValueError(f"metric key {key!r} may not contain spaces or '='")
        text = repr(float(value)) if isinstance(value, float) else str(value)
        if ' ' in text:
            raise ValueError(f"metric value {text!r} for {key!r} may not contain spaces")
        parts.append(f"{key}={text}")
    return ' '.join(parts)


def _parse_value(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_line(line: str, line_number: int = 0) -> Dict[str, Any]:
    """
    Raises:
        DataFormatError: If a field has no '='
    """
    record = {}
    for item in line.split():
        key, sep, value = item.partition('=')
        if not sep or not key:
            raise DataFormatError(f"line {line_number}: malformed metric field {item!r}")
        record[key] = _parse_value(value)
    return record


class MetricsLog:
    """Append-only metrics log of one training run.

    Creating a log starts an empty file. Records are formatted before
    anything is written; each append is one write followed by fsync.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self.records: List[Dict[str, Any]] = []
        atomic_write(self.path, '')

    def append(self, record: Dict[str, Any]) -> None:
        self.extend([record])

    def extend(self, records: Iterable[Dict[str, Any]]) -> None:
        records = [dict(record) for record in records]
        text = ''.join(format_record(record) + '\n' for record in records)
        if not text:
            return
        with open(self.path, 'a', encoding='utf-8') as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        self.records.extend(records)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records)


def read_metrics(path: Path) -> pd.DataFrame:
    """
    Read a metrics log into a DataFrame (one row per line).

    Raises:
        FileNotFoundError: If file doesn't exist
        DataFormatError: If a line is malformed
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    records = []
    with open(path, 'r', encoding='utf-8') as handle:
        for number, line in enumerate(handle, start=1):
            if line.strip():
                records.append(parse_line(line, number))
    logger.debug("Read %d metric records from %s", len(records), path)
    return pd.DataFrame(records)
