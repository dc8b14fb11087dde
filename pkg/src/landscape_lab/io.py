"""CSV and JSON interchange for simulation outputs.

Floats are written with %.17g so every value round-trips exactly; readers
return plain numpy arrays and leave interpretation to the caller.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DomainError
from .grids import Grid, GridFunction
from .kpz import InitialData, make_initial


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_columns_csv(path: str | Path, header: list[str], columns: list[np.ndarray]) -> None:
    cols = [np.asarray(c, dtype=np.float64).ravel() for c in columns]
    if len(cols) != len(header) or len(cols) == 0:
        raise DomainError("need one header entry per column")
    n = cols[0].size
    if any(c.size != n for c in cols):
        raise DomainError("columns must have equal length")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(c[i]) for c in cols) + "\n")


def read_columns_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Returns (header, values) with values shaped (n_rows, n_cols)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DomainError(f"{path} is empty")
    header = rows[0]
    if any(len(row) != len(header) for row in rows[1:]):
        raise DomainError(f"{path} has ragged rows")
    data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=np.float64)
    data = data.reshape(-1, len(header))
    return header, data


def write_ensemble_csv(path: str | Path, times: np.ndarray, lines: np.ndarray) -> None:
    """Rows are grid times; columns t, line_1, ..., line_k (top line first)."""
    lines = np.asarray(lines, dtype=np.float64)
    if lines.ndim != 2 or lines.shape[1] != np.asarray(times).size:
        raise DomainError("lines must be (k, len(times))")
    header = ["t"] + [f"line_{i + 1}" for i in range(lines.shape[0])]
    write_columns_csv(path, header, [np.asarray(times)] + list(lines))


def read_ensemble_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    header, data = read_columns_csv(path)
    if header[0] != "t" or len(header) < 2:
        raise DomainError(f"{path} is not an ensemble file")
    return data[:, 0], data[:, 1:].T.copy()


def write_sheet_csv(path: str | Path, x: np.ndarray, y: np.ndarray, values: np.ndarray) -> None:
    """Long format: one row per (x, y) pair, y fastest."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (x.size, y.size):
        raise DomainError("values must be (len(x), len(y))")
    xx = np.repeat(x, y.size)
    yy = np.tile(y, x.size)
    write_columns_csv(path, ["x", "y", "S"], [xx, yy, values.ravel()])


def read_sheet_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (x, y, values) with values shaped (len(x), len(y))."""
    header, data = read_columns_csv(path)
    if header != ["x", "y", "S"]:
        raise DomainError(f"{path} is not a sheet file")
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    if x.size * y.size != data.shape[0]:
        raise DomainError(f"{path} does not cover a full grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    values = data[order, 2].reshape(x.size, y.size)
    return x, y, values


def write_profile_csv(path: str | Path, profile: GridFunction) -> None:
    write_columns_csv(path, ["y", "h"], [profile.grid.times, profile.values])


def read_profile_csv(path: str | Path) -> GridFunction:
    header, data = read_columns_csv(path)
    if header != ["y", "h"]:
        raise DomainError(f"{path} is not a profile file")
    times = data[:, 0]
    if times.size < 2:
        raise DomainError(f"{path} has fewer than two rows")
    dt = float(times[1] - times[0])
    grid = Grid(float(times[0]), dt, times.size)
    if np.max(np.abs(grid.times - times)) > 1e-9 * max(1.0, np.max(np.abs(times))):
        raise DomainError(f"{path} rows are not evenly spaced")
    return GridFunction(grid, data[:, 1])


# ---------------------------------------------------------------------------
# Initial data as JSON
# ---------------------------------------------------------------------------


_POLY_NAMES = {"poly": "polynomial in x, params: {\"coeffs\": [c0, c1, c2]}"}


def initial_to_dict(h0: InitialData) -> dict[str, Any]:
    from .kpz import Flat, NarrowWedges, Sampled

    if isinstance(h0, NarrowWedges):
        return {
            "type": "narrow_wedges",
            "points": [{"x": float(x), "h": float(h)} for x, h in h0.points],
        }
    if isinstance(h0, Flat):
        return {
            "type": "flat",
            "level": h0.level,
            "support": list(h0.support) if h0.support is not None else None,
        }
    if isinstance(h0, Sampled):
        out: dict[str, Any] = {
            "type": "sampled",
            "grid": {"x0": h0.grid.t0, "dx": h0.grid.dt, "n": h0.grid.n_points},
            "values": [float(v) for v in h0.values],
        }
        if h0.mask is not None:
            out["mask"] = [bool(b) for b in h0.mask]
        return out
    raise DomainError(f"cannot serialize initial data of type {type(h0).__name__}")


def initial_from_dict(obj: dict[str, Any]) -> InitialData:
    kind = obj.get("type")
    if kind == "narrow_wedges":
        pts = [(float(p["x"]), float(p["h"])) for p in obj["points"]]
        return make_initial("wedges", points=pts)
    if kind == "flat":
        support = obj.get("support")
        return make_initial(
            "flat",
            level=float(obj.get("level", 0.0)),
            support=tuple(support) if support is not None else None,
        )
    if kind == "sampled":
        g = obj["grid"]
        grid = Grid(float(g["x0"]), float(g["dx"]), int(g["n"]))
        mask = obj.get("mask")
        return make_initial(
            "sampled",
            grid=grid,
            values=np.asarray(obj["values"], dtype=np.float64),
            mask=np.asarray(mask, dtype=bool) if mask is not None else None,
        )
    if kind == "parametric":
        name = obj.get("name")
        if name != "poly":
            raise DomainError(f"unknown parametric form {name!r}; known: {sorted(_POLY_NAMES)}")
        coeffs = [float(c) for c in obj["params"]["coeffs"]]
        if len(coeffs) > 3:
            raise DomainError("poly initial data supports degree <= 2")
        growth = obj.get("growth_bound", {})
        coeff = float(growth.get("coeff", coeffs[2] if len(coeffs) == 3 else 0.0))
        support = obj.get("support")

        def fn(x: np.ndarray) -> np.ndarray:
            acc = np.zeros_like(np.asarray(x, dtype=np.float64))
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc

        return make_initial(
            "parametric",
            description=f"poly{coeffs}",
            fn=fn,
            coeff=coeff,
            support=tuple(support) if support is not None else None,
        )
    raise DomainError(f"unknown initial data type {kind!r}")


def load_initial_json(path: str | Path) -> InitialData:
    with open(path) as fh:
        return initial_from_dict(json.load(fh))


def save_initial_json(path: str | Path, h0: InitialData) -> None:
    _atomic_write_json(path, initial_to_dict(h0))


# ---------------------------------------------------------------------------
# Run manifests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    """Provenance record written next to every CLI output.

    Outputs are bit-reproducible from (command, seed); the timestamps only
    document the run and never feed back into any computation.
    """

    command: str
    seed: int
    params: dict[str, Any] = field(default_factory=dict)
    outputs: tuple[str, ...] = ()
    config_hash: str = ""
    version: str = ""
    started: str = ""
    finished: str = ""

    @staticmethod
    def hash_params(params: dict[str, Any]) -> str:
        blob = json.dumps(params, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_manifest(path: str | Path, manifest: RunManifest) -> None:
    obj = asdict(manifest)
    obj["outputs"] = list(manifest.outputs)
    if not obj["config_hash"]:
        obj["config_hash"] = RunManifest.hash_params(manifest.params)
    _atomic_write_json(path, obj)


def read_manifest(path: str | Path) -> RunManifest:
    with open(path) as fh:
        obj = json.load(fh)
    return RunManifest(
        command=obj["command"],
        seed=int(obj["seed"]),
        params=obj.get("params", {}),
        outputs=tuple(obj.get("outputs", ())),
        config_hash=obj.get("config_hash", ""),
        version=obj.get("version", ""),
        started=obj.get("started", ""),
        finished=obj.get("finished", ""),
    )


def _atomic_write_json(path: str | Path, obj: Any) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
