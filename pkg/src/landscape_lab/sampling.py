"""Brownian paths, bridges, and conditioned non-crossing resampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import bridge_chain, bridge_chain_batch, heatbath_sweeps
from .errors import DomainError, InfeasibleRegionError
from .grids import Grid, GridFunction, same_grid
from .lpp import LineEnsembleGrid
from .rng import RngStream

DEFAULT_RATE = 2.0


def sample_bm(grid: Grid, rate: float = DEFAULT_RATE, start: float = 0.0, rng: RngStream | None = None) -> GridFunction:
    """Brownian motion on the grid: value at t0 is start exactly, increment variance rate*dt."""
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    if rng is None:
        raise DomainError("an RngStream is required")
    z = rng.normals(grid.n_points - 1)
    values = np.empty(grid.n_points)
    values[0] = start
    np.cumsum(z * np.sqrt(rate * grid.dt), out=values[1:])
    values[1:] += start
    return GridFunction(grid, values)


def sample_bridge(
    grid: Grid,
    rate: float = DEFAULT_RATE,
    a_val: float = 0.0,
    b_val: float = 0.0,
    rng: RngStream | None = None,
) -> GridFunction:
    """Brownian bridge from a_val to b_val over the grid, endpoints pinned exactly.

    Built by the sequentially conditioned walk: each step draws
    X_{j+1} | X_j, X_end from its Gaussian conditional.
    """
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    if rng is None:
        raise DomainError("an RngStream is required")
    total = grid.dt * (grid.n_points - 1)
    z = rng.normals(max(grid.n_points - 2, 0))
    values = bridge_chain(z, grid.dt, total, rate, a_val, b_val)
    return GridFunction(grid, values)


def decompose_bridge(bridge: GridFunction, breakpoints: list[float]) -> list[tuple[GridFunction, GridFunction]]:
    """Split a path into per-segment (chord interpolant, local bridge) pairs.

    Segments run between consecutive breakpoints, with the domain endpoints
    always included. chord + local reconstructs the input exactly on every
    segment; local vanishes at segment endpoints by construction.
    """
    grid = bridge.grid
    idx = sorted({grid.index_of(t) for t in breakpoints} | {0, grid.n_points - 1})
    out: list[tuple[GridFunction, GridFunction]] = []
    for a, b in zip(idx[:-1], idx[1:]):
        seg = Grid(float(grid.times[a]), grid.dt, b - a + 1)
        v = bridge.values[a : b + 1]
        frac = np.arange(b - a + 1) / (b - a)
        chord = v[0] * (1.0 - frac) + v[-1] * frac
        chord[0] = v[0]
        chord[-1] = v[-1]
        out.append((GridFunction(seg, chord), GridFunction(seg, v - chord)))
    return out


@dataclass(frozen=True)
class ResampleInfo:
    method: str  # "rejection" or "mcmc"
    attempts: int
    sweeps: int


def _check_window_feasible(lines: np.ndarray, rows: tuple[int, int], j_lo: int, j_hi: int, floor_vals: np.ndarray | None) -> None:
    r_lo, r_hi = rows
    cols = (j_lo, j_hi)
    for j in cols:
        col = lines[r_lo - 1 : r_hi, j]
        upper = lines[r_lo - 2, j] if r_lo >= 2 else np.inf
        lower = lines[r_hi, j] if r_hi < lines.shape[0] else -np.inf
        if floor_vals is not None:
            lower = max(lower, floor_vals[j])
        stacked = np.concatenate(([upper], col, [lower]))
        if np.any(np.diff(stacked) >= 0):
            raise InfeasibleRegionError(
                f"window endpoints at column {j} admit no strictly ordered configuration"
            )


def resample_nonintersecting(
    ensemble: LineEnsembleGrid,
    rows: tuple[int, int],
    window: tuple[float, float],
    floor: GridFunction | None = None,
    rng: RngStream | None = None,
    rate: float = DEFAULT_RATE,
    rejection_budget: int = 10_000,
    mcmc_sweeps: int = 1_000,
) -> tuple[LineEnsembleGrid, ResampleInfo]:
    """Redraw rows r_lo..r_hi inside the window, conditioned on mutual avoidance.

    Outside rows x window the ensemble is untouched. The law is independent
    bridges between the window endpoint values, conditioned on strict
    ordering below line r_lo - 1, above line r_hi + 1 (or the floor).
    Vectorized rejection first; after rejection_budget failures, a
    single-site heat-bath pass with shared uniforms takes over (monotone in
    the floor and the boundary data, by inverse-CDF truncated draws).
    """
    if rng is None:
        raise DomainError("an RngStream is required")
    r_lo, r_hi = rows
    if not (1 <= r_lo <= r_hi <= ensemble.n_lines):
        raise DomainError(f"rows {rows} outside 1..{ensemble.n_lines}")
    j_lo = ensemble.grid.index_of(window[0])
    j_hi = ensemble.grid.index_of(window[1])
    if j_hi - j_lo < 2:
        raise DomainError("window must contain at least one interior point")
    floor_vals = None
    if floor is not None:
        same_grid(floor.grid, ensemble.grid)
        floor_vals = floor.values
    _check_window_feasible(ensemble.lines, rows, j_lo, j_hi, floor_vals)

    n_rows = r_hi - r_lo + 1
    n_interior = j_hi - j_lo - 1
    width = j_hi - j_lo
    total = ensemble.grid.dt * width
    a_vals = ensemble.lines[r_lo - 1 : r_hi, j_lo].copy()
    b_vals = ensemble.lines[r_lo - 1 : r_hi, j_hi].copy()

    upper = ensemble.lines[r_lo - 2, j_lo : j_hi + 1] if r_lo >= 2 else None
    lower = ensemble.lines[r_hi, j_lo : j_hi + 1] if r_hi < ensemble.n_lines else None
    if floor_vals is not None:
        fl = floor_vals[j_lo : j_hi + 1]
        lower = fl if lower is None else np.maximum(lower, fl)

    def _accepts(block: np.ndarray) -> bool:
        # block: (n_rows, width+1) candidate values on the window.
        if n_rows > 1 and not np.all(block[:-1, 1:-1] > block[1:, 1:-1]):
            return False
        if upper is not None and not np.all(block[0, 1:-1] < upper[1:-1]):
            return False
        if lower is not None and not np.all(block[-1, 1:-1] > lower[1:-1]):
            return False
        return True

    attempts = 0
    batch = 128
    while attempts < rejection_budget:
        n_draw = min(batch, rejection_budget - attempts)
        z = rng.normals((n_draw * n_rows, max(n_interior, 0)))
        cand = bridge_chain_batch(
            z, ensemble.grid.dt, total, rate,
            np.tile(a_vals, n_draw), np.tile(b_vals, n_draw),
        ).reshape(n_draw, n_rows, width + 1)
        for t in range(n_draw):
            attempts += 1
            if _accepts(cand[t]):
                new_lines = ensemble.lines.copy()
                new_lines[r_lo - 1 : r_hi, j_lo + 1 : j_hi] = cand[t][:, 1:-1]
                return (
                    LineEnsembleGrid(ensemble.grid, new_lines),
                    ResampleInfo("rejection", attempts, 0),
                )

    # Heat-bath fallback from a deterministic feasible start (endpoint chords,
    # pushed apart bottom-up where they would touch).
    new_lines = ensemble.lines.copy()
    frac = np.arange(width + 1) / width
    chords = a_vals[:, None] * (1.0 - frac) + b_vals[:, None] * frac
    eps = 1e-9 * max(1.0, float(np.max(np.abs(ensemble.lines[:, j_lo : j_hi + 1]))))
    start = chords.copy()
    if lower is not None:
        start[-1] = np.maximum(start[-1], lower + eps)
        start[-1, 0], start[-1, -1] = a_vals[-1], b_vals[-1]
    for r in range(n_rows - 2, -1, -1):
        start[r] = np.maximum(start[r], start[r + 1] + eps)
        start[r, 0], start[r, -1] = a_vals[r], b_vals[r]
    if upper is not None and not np.all(start[0, 1:-1] < upper[1:-1]):
        raise InfeasibleRegionError("no room between the bounding lines for a feasible start")
    new_lines[r_lo - 1 : r_hi, j_lo : j_hi + 1] = start

    sub = new_lines[max(r_lo - 2, 0) : min(r_hi + 1, ensemble.n_lines), j_lo : j_hi + 1].copy()
    if r_hi < ensemble.n_lines and floor_vals is not None:
        # sub's last row is the bounding line, and it is a scratch copy here:
        # lifting it to the floor makes the heat bath respect both constraints.
        sub[-1] = np.maximum(sub[-1], floor_vals[j_lo : j_hi + 1])
    row_off = 1 if r_lo >= 2 else 0
    fl = lower if (r_hi == ensemble.n_lines and lower is not None) else np.zeros(width + 1)
    has_floor = r_hi == ensemble.n_lines and lower is not None
    u = rng.uniforms((mcmc_sweeps, n_rows, max(n_interior, 0)))
    heatbath_sweeps(
        sub, row_off, row_off + n_rows - 1, 0, width, fl, has_floor,
        ensemble.grid.dt, rate, u,
    )
    new_lines[r_lo - 1 : r_hi, j_lo + 1 : j_hi] = sub[row_off : row_off + n_rows, 1:-1]
    out = LineEnsembleGrid(ensemble.grid, new_lines)
    block = out.lines[r_lo - 1 : r_hi, j_lo : j_hi + 1]
    if not _accepts(block):
        raise InfeasibleRegionError("heat bath terminated on an unordered state")
    return out, ResampleInfo("mcmc", attempts, mcmc_sweeps)
