import os
import csv
import json
import math
import logging
import tempfile
from enum import Enum
from typing import Any, Iterable, Sequence

import numpy as np

from .utils.exceptions import OutputError

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """Render one CSV cell; floats keep 17 significant digits."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), '.17g')
    if value is None:
        return ''
    return str(value)


def jsonable(value: Any) -> Any:
    """Convert numpy scalars, tuples, complex numbers and non-finite floats to plain JSON."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [jsonable(value.real), jsonable(value.imag)]
    return value


def dumps(data: Any) -> str:
    return json.dumps(jsonable(data), indent=2, sort_keys=True) + '\n'


class Output:
    """Writes CSV tables and JSON reports."""

    def __init__(self, output_dir: str = 'output'):
        """
        Initialize with output directory.

        Args:
            output_dir: Base directory for output files
        """
        self.output_dir = output_dir
        try:
            os.makedirs(output_dir, exist_ok=True)
        except OSError as e:
            raise OutputError(f"Cannot create output directory {output_dir}: {e}") from e

    @classmethod
    def for_path(cls, path: str) -> 'Output':
        """Output rooted at the directory of ``path``."""
        return cls(os.path.dirname(os.path.abspath(path)))

    def _path(self, name: str) -> str:
        return os.path.join(self.output_dir, os.path.basename(name))

    def _write(self, name: str, writer) -> str:
        path = self._path(name)
        fd, temp_path = tempfile.mkstemp(dir=self.output_dir, prefix='.tmp_', suffix=os.path.basename(name))
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
                writer(f)
            os.replace(temp_path, path)
        except OSError as e:
            if os.path.exists(temp_path):
                os.remove(temp_path)
            raise OutputError(f"Failed to write {path}: {e}") from e
        logger.info("Wrote %s", path)
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        """
        Write a CSV table.

        Args:
            name: File name inside the output directory
            header: Column names
            rows: Row tuples; floats are written with 17 significant digits

        Returns:
            Path to the written file
        """
        def writer(f):
            out = csv.writer(f, lineterminator='\n')
            out.writerow(header)
            for row in rows:
                out.writerow([format_value(v) for v in row])

        return self._write(name, writer)

    def write_json(self, name: str, data: Any) -> str:
        """Write a JSON document with sorted keys."""
        text = dumps(data)
        return self._write(name, lambda f: f.write(text))

    def write_config(self, name: str, config: Any, suffix: str = '.config.json') -> str:
        """Echo the resolved run configuration to ``<name><suffix>``."""
        return self.write_json(os.path.basename(name) + suffix, config.to_dict())
