"""Write-then-rename file output and the per-directory command lock."""

import logging
import os
import tempfile
from pathlib import Path
from typing import Union

from ..exceptions import ConfigError

logger = logging.getLogger(__name__)

LOCK_NAME = '.lock'


def atomic_write(path: Path, data: Union[bytes, str]) -> Path:
    """
    Write ``data`` to ``path`` so readers never see a partial file.

    The content goes to a temporary file in the same directory, which then
    replaces ``path`` in one rename.

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode('utf-8') if isinstance(data, str) else data

    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(payload)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug("Wrote %d bytes to %s", len(payload), path)
    return path


class OutputLock:
    """Exclusive lock on an output directory, held for one command.

    Usage:
        with OutputLock(out_dir):
            ...
    """

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.path = self.directory / LOCK_NAME
        self._held = False

    def acquire(self) -> None:
        """
        Raises:
            ConfigError: If another command holds the lock
        """
        self.directory.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as exc:
            raise ConfigError(
                f"{self.directory} is in use by another command (remove {self.path} if stale)"
            ) from exc
        with os.fdopen(fd, 'w') as handle:
            handle.write(f"{os.getpid()}\n")
        self._held = True

    def release(self) -> None:
        if self._held:
            self.path.unlink(missing_ok=True)
            self._held = False

    @property
    def held(self) -> bool:
        return self._held

    def __enter__(self) -> 'OutputLock':
        self.acquire()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.release()
