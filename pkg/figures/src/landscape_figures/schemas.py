"""Readers for the landscape-lab CSV artifacts.

Three fixed schemas: profiles are ``y,h``; ensembles are
``t,line_1,...,line_k``; sheets are long form ``x,y,S`` with y varying
fastest. Readers validate headers and shapes and raise SchemaError with
a column diagnostic; they never coerce silently.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """An input file does not match the schema it was read as."""


def _read_rows(path: str | Path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input {path} does not exist")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path} is empty")
    header = rows[0]
    widths = {len(r) for r in rows[1:]}
    if widths - {len(header)}:
        raise SchemaError(
            f"{path}: ragged rows (header has {len(header)} columns, rows have {sorted(widths)})"
        )
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    return header, data.reshape(-1, len(header))


def read_profile(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Profile CSV ``y,h`` as (y, h)."""
    header, data = _read_rows(path)
    if header != ["y", "h"]:
        raise SchemaError(f"{path}: expected columns ['y', 'h'], found {header}")
    if data.shape[0] < 2:
        raise SchemaError(f"{path}: a profile needs at least two rows")
    return data[:, 0], data[:, 1]


def read_ensemble(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble CSV ``t,line_1,...`` as (t, lines) with lines shaped (k, t.size)."""
    header, data = _read_rows(path)
    if len(header) < 2 or header[0] != "t" or header[1:] != [f"line_{i}" for i in range(1, len(header))]:
        raise SchemaError(f"{path}: expected columns ['t', 'line_1', ...], found {header}")
    return data[:, 0], data[:, 1:].T.copy()


def read_curve(path: str | Path) -> tuple[np.ndarray, np.ndarray, str]:
    """A single curve from either schema: a profile, or an ensemble's top line."""
    header, _ = _read_rows(path)
    if header[:1] == ["y"]:
        y, h = read_profile(path)
        return y, h, "y"
    t, lines = read_ensemble(path)
    return t, lines[0], "t"


def read_sheet(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sheet CSV ``x,y,S`` as (x, y, values) with values shaped (x.size, y.size)."""
    header, data = _read_rows(path)
    if header != ["x", "y", "S"]:
        raise SchemaError(f"{path}: expected columns ['x', 'y', 'S'], found {header}")
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    if x.size * y.size != data.shape[0]:
        raise SchemaError(
            f"{path}: rows do not cover a full grid "
            f"({data.shape[0]} rows, {x.size} x values, {y.size} y values)"
        )
    order = np.lexsort((data[:, 1], data[:, 0]))
    values = data[order, 2].reshape(x.size, y.size)
    return x, y, values
