"""Uniform time grids and grid-sampled functions.

Grid times are computed as ``round(t0/dt)*dt + j*dt`` fused into a single
product ``(j0 + j) * dt`` so that two grids with the same spacing produce
bit-identical floats on shared segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AlignmentError, DomainError, GridMismatchError

# Relative slack for matching a time to a grid index.
_ALIGN_RTOL = 1e-9


@dataclass(frozen=True)
class Grid:
    t0: float
    dt: float
    n_points: int

    def __post_init__(self) -> None:
        if not (self.dt > 0.0) or not np.isfinite(self.dt):
            raise DomainError(f"dt must be positive and finite, got {self.dt}")
        if self.n_points < 2:
            raise DomainError(f"grid needs at least 2 points, got {self.n_points}")
        if not np.isfinite(self.t0):
            raise DomainError(f"t0 must be finite, got {self.t0}")

    @cached_property
    def _j0(self) -> int:
        return round(self.t0 / self.dt)

    @cached_property
    def times(self) -> np.ndarray:
        t = (self._j0 + np.arange(self.n_points, dtype=np.int64)) * self.dt
        # When t0 is not commensurate with dt, fall back to plain offsets.
        if abs(t[0] - self.t0) > _ALIGN_RTOL * max(1.0, abs(self.t0)):
            t = self.t0 + self.dt * np.arange(self.n_points)
        t.setflags(write=False)
        return t

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def index_of(self, t: float) -> int:
        """Index of the grid point equal to t; AlignmentError if t is off-grid."""
        j = round((t - float(self.times[0])) / self.dt)
        if j < 0 or j >= self.n_points:
            raise AlignmentError(f"time {t} outside grid [{self.times[0]}, {self.t_end}]")
        tj = float(self.times[j])
        if abs(t - tj) > _ALIGN_RTOL * max(1.0, abs(tj)):
            raise AlignmentError(f"time {t} is not a grid point (nearest {tj})")
        return int(j)

    def refine_half(self) -> "Grid":
        """Grid with one extra point between every pair (spacing dt/2)."""
        return Grid(self.t0, self.dt / 2.0, 2 * self.n_points - 1)


def linspace_grid(t_start: float, t_end: float, dt: float) -> Grid:
    """Grid from t_start to at least t_end with spacing dt, endpoints snapped to multiples of dt."""
    j0 = round(t_start / dt)
    j1 = round(t_end / dt)
    if j1 * dt < t_end - 1e-12:
        j1 += 1
    if j1 <= j0:
        raise DomainError(f"empty grid for [{t_start}, {t_end}] at dt={dt}")
    return Grid(j0 * dt, dt, j1 - j0 + 1)


@dataclass(frozen=True)
class GridFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n_points,):
            raise DomainError(
                f"values shape {v.shape} does not match grid with {self.grid.n_points} points"
            )
        if not np.all(np.isfinite(v)):
            raise DomainError("grid function values must all be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, t: float) -> float:
        return float(self.values[self.grid.index_of(t)])

    def restrict(self, t_lo: float, t_hi: float) -> "GridFunction":
        i = self.grid.index_of(t_lo)
        j = self.grid.index_of(t_hi)
        if j < i:
            raise DomainError("restrict needs t_lo <= t_hi")
        g = Grid(float(self.grid.times[i]), self.grid.dt, j - i + 1)
        return GridFunction(g, self.values[i : j + 1])


def same_grid(a: Grid, b: Grid) -> None:
    """Raise GridMismatchError unless a and b are the same grid."""
    if a.n_points != b.n_points or a.dt != b.dt or abs(a.t0 - b.t0) > _ALIGN_RTOL * max(1.0, abs(a.t0)):
        raise GridMismatchError(f"grids differ: {a} vs {b}")
