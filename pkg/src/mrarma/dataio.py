"""Reading and writing univariate integer series files.

The on-disk format is one integer per line. A single non-numeric header
line is tolerated (and reported); values with decimal points are rejected
rather than silently rounded. Single-column CSV with a trailing comma or
semicolon parses too.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["DataSet", "load_series", "write_series"]

_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class DataSet:
    values: np.ndarray
    source_path: str
    label: str
    skipped_header: str | None = None


def load_series(path) -> DataSet:
    """Parse a series file strictly: every value must be an integer."""
    path = Path(path)
    text = path.read_text()
    values: list[int] = []
    skipped_header: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip().rstrip(",;").strip()
        if not line:
            continue
        if ("," in line) or (";" in line):
            raise ValueError(f"{path}:{lineno}: expected a single column, "
                             f"got {raw!r}")
        if _INT_RE.match(line):
            values.append(int(line))
        elif not values and skipped_header is None:
            skipped_header = line
        else:
            raise ValueError(f"{path}:{lineno}: {line!r} is not an integer "
                             f"(decimals are rejected, not rounded)")
    if not values:
        raise ValueError(f"{path}: no integer values found")
    return DataSet(values=np.asarray(values, dtype=np.int64),
                   source_path=str(path), label=path.stem,
                   skipped_header=skipped_header)


def write_series(path, values) -> None:
    """Write one integer per line."""
    values = np.asarray(values)
    Path(path).write_text("".join(f"{int(v)}\n" for v in values))
