"""CSV tables with round-trip float formatting.

Floats are written with ``repr``, the shortest text that parses back to the
same double, so files diff bit-exactly between runs.
"""

from __future__ import annotations

import csv
import os

import numpy as np


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(path, header, rows):
    """Write ``rows`` (iterables matching ``header``) to ``path``."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            row = list(row)
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
            w.writerow([_fmt(v) for v in row])


def _parse(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path):
    """Return ``(header, rows)`` with numeric fields converted back."""
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[_parse(v) for v in row] for row in r]
    return header, rows


def write_matrix(path, matrix, prefix="c"):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    header = [f"{prefix}{j}" for j in range(matrix.shape[1])]
    write_table(path, header, matrix.tolist())


def read_matrix(path):
    _, rows = read_table(path)
    return np.array(rows, dtype=float)
