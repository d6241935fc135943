"""CSV output shared by all modules.

Columns are comma separated, the first line is a header whose entries carry
units in parentheses, and every number is written in scientific notation
with 12 significant digits so that identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def format_value(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".11e")


def write_csv(path, header, columns) -> Path:
    """Write equally long ``columns`` under ``header`` to ``path``."""
    path = Path(path)
    columns = [np.asarray(c) for c in columns]
    if len(header) != len(columns):
        raise ValueError("header and columns differ in length")
    lengths = {len(c) for c in columns}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([format_value(v) for v in row])
    return path


def read_csv(path):
    """Read a file written by :func:`write_csv` into ``(header, float array)``."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in row] for row in body], dtype=float)
    return header, data.reshape(len(body), len(header))
