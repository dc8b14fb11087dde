"""Last passage percolation across line ensembles, Pitman reflections, melons.

Conventions: line 1 is the top line (row 0 of the array). A jump path from
(x, k) to (y, m) with m <= k moves through levels k, k-1, ..., m as time
increases; its length telescopes as sum_i f_i(exit_i) - f_i(enter_i).
Grid-restricted maximization is exact for piecewise-linear line data, so
the DP below is the whole story, not an approximation of one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import backtrack_rightmost, dp_all, dp_top, melon_passes
from .errors import DomainError
from .grids import Grid, GridFunction, same_grid


@dataclass(frozen=True)
class LineEnsembleGrid:
    grid: Grid
    lines: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(np.asarray(self.lines, dtype=np.float64))
        if v.ndim != 2 or v.shape[1] != self.grid.n_points:
            raise DomainError(
                f"lines must be (k, {self.grid.n_points}), got {np.asarray(self.lines).shape}"
            )
        if v.shape[0] < 1:
            raise DomainError("ensemble needs at least one line")
        if not np.all(np.isfinite(v)):
            raise DomainError("line values must all be finite")
        v.setflags(write=False)
        object.__setattr__(self, "lines", v)

    @property
    def n_lines(self) -> int:
        return int(self.lines.shape[0])

    def line(self, index: int) -> GridFunction:
        """Line by 1-based index, 1 = top."""
        if not 1 <= index <= self.n_lines:
            raise DomainError(f"line index {index} outside 1..{self.n_lines}")
        return GridFunction(self.grid, self.lines[index - 1])


@dataclass(frozen=True)
class JumpPath:
    start_level: int
    end_level: int
    jump_times: tuple[float, ...]
    domain: tuple[float, float]

    def __post_init__(self) -> None:
        if self.end_level > self.start_level:
            raise DomainError("end_level must not exceed start_level")
        if len(self.jump_times) != self.start_level - self.end_level:
            raise DomainError("need exactly one jump time per level crossed")
        x, y = self.domain
        if x > y:
            raise DomainError("domain must satisfy x <= y")
        prev = x
        for t in self.jump_times:
            if t < x or t > y:
                raise DomainError(f"jump time {t} outside domain [{x}, {y}]")
            if t < prev:
                raise DomainError("jump times must be non-decreasing")
            prev = t


@dataclass(frozen=True)
class BoundaryData:
    values: np.ndarray
    strict: bool = False

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise DomainError("boundary data must be a nonempty vector")
        if not np.all(np.isfinite(v)):
            raise DomainError("boundary values must be finite")
        if np.any(np.diff(v) > 0):
            raise DomainError("boundary values must be non-increasing")
        if self.strict and np.any(np.diff(v) >= 0):
            raise DomainError("boundary values must be strictly decreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)


def path_length(ensemble: LineEnsembleGrid, path: JumpPath) -> float:
    """Telescoping length of a jump path; repeated interior times are fine."""
    x, y = path.domain
    if path.start_level > ensemble.n_lines or path.end_level < 1:
        raise DomainError("path levels outside ensemble")
    jx = ensemble.grid.index_of(x)
    jy = ensemble.grid.index_of(y)
    if jy < jx:
        raise DomainError("domain must satisfy x <= y on the grid")
    total = 0.0
    enter = jx
    level = path.start_level
    for t in path.jump_times:
        j = ensemble.grid.index_of(t)
        total += ensemble.lines[level - 1, j] - ensemble.lines[level - 1, enter]
        enter = j
        level -= 1
    total += ensemble.lines[path.end_level - 1, jy] - ensemble.lines[path.end_level - 1, enter]
    return float(total)


def _dp_window(ensemble: LineEnsembleGrid, from_pt: tuple[float, int], to_pt: tuple[float, int]):
    x, k = from_pt
    y, m = to_pt
    if m > k:
        raise DomainError(f"target level {m} above start level {k} is empty")
    if not (1 <= m and k <= ensemble.n_lines):
        raise DomainError("levels outside ensemble")
    jx = ensemble.grid.index_of(x)
    jy = ensemble.grid.index_of(y)
    if jy < jx:
        raise DomainError(f"need x <= y, got x={x}, y={y}")
    sub = np.ascontiguousarray(ensemble.lines[m - 1 : k, jx : jy + 1])
    offsets = np.full(sub.shape[1], -np.inf)
    offsets[0] = 0.0
    return sub, offsets, jx, jy


def lpp(ensemble: LineEnsembleGrid, from_pt: tuple[float, int], to_pt: tuple[float, int]) -> float:
    """Last passage value from (x, k) to (y, m), maximized over grid-aligned jump paths."""
    sub, offsets, jx, jy = _dp_window(ensemble, from_pt, to_pt)
    d = dp_top(sub, offsets)
    return float(d[-1])


def rightmost_geodesic(ensemble: LineEnsembleGrid, from_pt: tuple[float, int], to_pt: tuple[float, int]) -> JumpPath:
    """The maximizing jump path with lexicographically latest jump times."""
    sub, offsets, jx, jy = _dp_window(ensemble, from_pt, to_pt)
    d = dp_all(sub, offsets)
    jumps = backtrack_rightmost(sub, d, 0, jy - jx)
    times = ensemble.grid.times
    # jumps[lev] is the jump onto row lev; path order is bottom row first.
    ordered = [float(times[jx + jumps[lev]]) for lev in range(len(jumps) - 1, -1, -1)]
    return JumpPath(
        start_level=from_pt[1],
        end_level=to_pt[1],
        jump_times=tuple(ordered),
        domain=(float(times[jx]), float(times[jy])),
    )


def pitman(f1: GridFunction, f2: GridFunction) -> tuple[GridFunction, GridFunction]:
    """Reflect f1 off f2: returns (f1 + g, f2 - g) with g the clipped running max of f2 - f1."""
    same_grid(f1.grid, f2.grid)
    g = np.maximum(np.maximum.accumulate(f2.values - f1.values), 0.0)
    return GridFunction(f1.grid, f1.values + g), GridFunction(f2.grid, f2.values - g)


def melon(ensemble: LineEnsembleGrid) -> LineEnsembleGrid:
    """Sort the ensemble into ordered non-crossing lines by iterated pairwise reflection.

    The schedule runs n-1 sweeps; sweep p finalizes line p+1. Sums over
    lines are conserved pointwise and the top line equals the last passage
    value to level 1 from the grid start.
    """
    work = ensemble.lines.copy()
    melon_passes(work, max(ensemble.n_lines - 1, 0))
    return LineEnsembleGrid(ensemble.grid, work)


def melon_top(ensemble: LineEnsembleGrid, k: int) -> LineEnsembleGrid:
    """First k melon lines via k sweeps (the rest of the array is discarded)."""
    if not 1 <= k <= ensemble.n_lines:
        raise DomainError(f"k={k} outside 1..{ensemble.n_lines}")
    work = ensemble.lines.copy()
    melon_passes(work, min(k, ensemble.n_lines - 1))
    return LineEnsembleGrid(ensemble.grid, work[:k])


def reflect_with_boundary(boundary: BoundaryData, ensemble: LineEnsembleGrid, target_level: int) -> GridFunction:
    """s -> max over levels l >= target of (G_l + lpp((origin, l) -> (s, target))).

    origin is the grid start. Computed by one DP that seeds each level's
    running max with its own boundary value at the origin.
    """
    n_bound = len(boundary)
    if n_bound > ensemble.n_lines:
        raise DomainError(f"boundary has {n_bound} values but ensemble only {ensemble.n_lines} lines")
    if not 1 <= target_level <= n_bound:
        raise DomainError(f"target level {target_level} outside 1..{n_bound}")
    lines = ensemble.lines
    d = None
    for level in range(n_bound, target_level - 1, -1):
        row = lines[level - 1]
        seed = boundary.values[level - 1] - row[0]
        if d is None:
            cand = np.full(row.shape, -np.inf)
        else:
            cand = d - row
        cand[0] = max(cand[0], seed)
        d = row + np.maximum.accumulate(cand)
    return GridFunction(ensemble.grid, d)
