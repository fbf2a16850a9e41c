"""Canonical JSON encoding and all-or-nothing output bundles."""

import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

INDENT = 2

PathLike = Union[str, Path]


def _plain(value: Any) -> Any:
    """Numpy values as Python ones; non-finite floats as ``None``."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    return value


def dumps(data: Any) -> str:
    """Deterministic JSON text.

    Keys keep insertion order, floats use their round-trip ``repr``,
    non-finite floats become ``null`` and the text ends with a newline.
    """
    return json.dumps(_plain(data), indent=INDENT, allow_nan=False, ensure_ascii=False) + "\n"


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")


class OutputBundle:
    """Collects a command's outputs and writes them in one step.

    Nothing touches the output directory until :meth:`commit`, so a command
    that fails while computing leaves no partial outputs behind.
    """

    def __init__(self, directory: PathLike) -> None:
        self._dir = Path(directory)
        self._files: Dict[Path, str] = {}

    @property
    def directory(self) -> Path:
        return self._dir

    @property
    def names(self) -> List[str]:
        return [str(path) for path in self._files]

    def _target(self, name: PathLike) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self._dir / path

    def add_json(self, name: PathLike, data: Any) -> None:
        """Stage JSON under the bundle directory, or at ``name`` if absolute."""
        self._files[self._target(name)] = dumps(data)

    def add_frame(self, name: PathLike, frame: pd.DataFrame) -> None:
        self._files[self._target(name)] = frame_to_csv(frame)

    def add_text(self, name: PathLike, text: str) -> None:
        self._files[self._target(name)] = text

    def commit(self) -> List[Path]:
        """Write every staged file, each through a temporary file and rename."""
        self._dir.mkdir(parents=True, exist_ok=True)
        written: List[Path] = []
        for target, text in self._files.items():
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                    handle.write(text)
                os.replace(tmp, target)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            written.append(target)
        logger.info("Wrote %d files to %s", len(written), self._dir)
        return written
