"""Edge-scaled prelimit samplers: line ensembles, sheets, boundary data, geodesics.

The prelimit is a melon of n rate-1 Brownian motions. With T_y = 1 + 2y n^{-1/3},
line i of the ensemble is read off at time T_y and recentred; the sheet is a
direct last passage value between scaled endpoints over the same driving
paths. Driving environments are corner-corrected (see sample_driving), which
is what makes desk-scale n match the same-n random-matrix edge oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import backtrack_rightmost, corner_refine, dp_all, dp_top
from .errors import AlignmentError, DomainError, EmptySupportError
from .grids import Grid, GridFunction, linspace_grid
from .lpp import BoundaryData, LineEnsembleGrid, melon_top
from .rng import RngStream

NORMALIZATIONS = ("affine", "shape_exact")


# ---------------------------------------------------------------------------
# Driving environments
# ---------------------------------------------------------------------------


def sample_driving(
    n: int,
    t_start: float,
    t_end: float,
    dt: float,
    rng: RngStream,
    corner_corrected: bool = True,
    pin_time: float | None = 0.0,
) -> LineEnsembleGrid:
    """n independent rate-1 lines on [t_start, t_end], each pinned to 0 at pin_time.

    Pinning is free for last passage purposes (lengths telescope over
    increments) and makes the melon coupling at the pin time exact.

    With corner_corrected=True the returned grid has spacing dt/2: every odd
    column is a virtual midpoint whose values encode the exact running
    maximum of each adjacent pair-difference bridge across its cell, so that
    level crossings pick up the in-cell maximum instead of the endpoint
    value. Anchors and outputs should use even (real) columns.

    Draw order is fixed: first (n, P-1) normals, then (n-1, P-1) uniforms.
    """
    if n < 1:
        raise DomainError(f"need at least one line, got n={n}")
    grid = linspace_grid(t_start, t_end, dt)
    p = grid.n_points
    z = rng.normals((n, p - 1))
    values = np.empty((n, p))
    values[:, 0] = 0.0
    np.cumsum(z * math.sqrt(dt), axis=1, out=values[:, 1:])
    if pin_time is not None:
        j_pin = grid.index_of(pin_time) if grid.times[0] <= pin_time <= grid.t_end else 0
        values -= values[:, j_pin][:, None]
    if not corner_corrected or n == 1:
        return LineEnsembleGrid(grid, values)
    log_u = np.log(rng.uniforms((n - 1, p - 1)))
    refined = corner_refine(values, dt, log_u)
    return LineEnsembleGrid(grid.refine_half(), refined)


def real_columns(driving: LineEnsembleGrid, dt: float) -> slice:
    """Slice selecting the real (pre-refinement) columns of a driving environment."""
    step = round(dt / driving.grid.dt)
    if step not in (1, 2):
        raise DomainError(f"environment spacing {driving.grid.dt} does not match dt={dt}")
    return slice(0, driving.grid.n_points, step)


def reversed_environment(driving: LineEnsembleGrid) -> LineEnsembleGrid:
    """Time- and level-reversed environment: f~_i(t) = -f_{n+1-i}(-t).

    Last passage from (a, n) to (b, 1) over the original equals last passage
    from (-b, n) to (-a, 1) over the reversal, which turns anchor-varying
    columns into a single DP sweep.
    """
    g = driving.grid
    rev = Grid(-g.t_end, g.dt, g.n_points)
    return LineEnsembleGrid(rev, np.ascontiguousarray(-driving.lines[::-1, ::-1]))


# ---------------------------------------------------------------------------
# Edge scaling
# ---------------------------------------------------------------------------


def airy_time(n: int, y: float) -> float:
    return 1.0 + 2.0 * y * n ** (-1.0 / 3.0)


def airy_coord(n: int, t: float) -> float:
    return (t - 1.0) * n ** (1.0 / 3.0) / 2.0


def _normalize(melon_vals: np.ndarray, t_times: np.ndarray, n: int, normalization: str) -> np.ndarray:
    """Edge rescaling of melon values read at times t_times."""
    n16 = n ** (1.0 / 6.0)
    if normalization == "affine":
        return n16 * (melon_vals - 2.0 * math.sqrt(n)) - (t_times - 1.0) * n ** (2.0 / 3.0)
    if normalization == "shape_exact":
        # Divides out the sqrt(T) fluctuation scale so the one-point law is
        # the n-level matrix edge law at every y, not only y=0.
        root_t = np.sqrt(t_times)
        y = (t_times - 1.0) * n ** (1.0 / 3.0) / 2.0
        return n16 * (melon_vals - 2.0 * np.sqrt(n * t_times)) / root_t - y * y
    raise DomainError(f"unknown normalization {normalization!r}")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AiryEnsembleApprox:
    n: int
    ensemble: LineEnsembleGrid  # lines on the y-coordinate grid, 1 = top
    window: tuple[float, float]
    normalization: str = "affine"

    def __post_init__(self) -> None:
        if self.normalization not in NORMALIZATIONS:
            raise DomainError(f"unknown normalization {self.normalization!r}")
        lines = self.ensemble.lines
        if lines.shape[0] > 1 and not np.all(lines[:-1] > lines[1:]):
            raise DomainError("ensemble lines must be strictly ordered")

    @property
    def y_grid(self) -> Grid:
        return self.ensemble.grid

    def top_line_parabola_sup(self) -> float:
        """Diagnostic: sup over the window of |A_1(y) + y^2| (should stay O(1))."""
        y = self.y_grid.times
        return float(np.max(np.abs(self.ensemble.lines[0] + y * y)))


@dataclass(frozen=True)
class SheetSample:
    x_grid: np.ndarray
    y_grid: np.ndarray
    values: np.ndarray = field(repr=False)
    scale: float = 1.0

    def __post_init__(self) -> None:
        xg = np.asarray(self.x_grid, dtype=np.float64)
        yg = np.asarray(self.y_grid, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (xg.size, yg.size):
            raise DomainError(f"values shape {v.shape} does not match grids ({xg.size}, {yg.size})")
        if not (self.scale > 0):
            raise DomainError(f"scale must be positive, got {self.scale}")
        if not np.all(np.isfinite(v)):
            raise DomainError("sheet values must be finite")
        if np.any(np.diff(xg) <= 0) or np.any(np.diff(yg) <= 0):
            raise DomainError("sheet grids must be strictly increasing")
        for arr in (xg, yg, v):
            arr.setflags(write=False)
        object.__setattr__(self, "x_grid", xg)
        object.__setattr__(self, "y_grid", yg)
        object.__setattr__(self, "values", v)
        self._assert_quadrangle()

    def worst_quadrangle_gap(self) -> float:
        """min over all grid rectangles x<x', y<y' of
        S(x,y) + S(x',y') - S(x,y') - S(x',y); nonnegative up to round-off."""
        v = self.values
        worst = 0.0
        for a in range(v.shape[0] - 1):
            d = v[a + 1 :] - v[a]  # (nx - a - 1, ny)
            run_min = np.minimum.accumulate(d[:, :-1], axis=1)
            gap = np.min(d[:, 1:] - run_min)
            worst = min(worst, float(gap))
        return worst

    def _assert_quadrangle(self, tol: float = 1e-9) -> None:
        worst = self.worst_quadrangle_gap()
        if worst < -tol * max(1.0, self.scale):
            raise DomainError(f"quadrangle inequality violated by {-worst:.3e}")

    def x_index(self, x: float) -> int:
        i = int(np.argmin(np.abs(self.x_grid - x)))
        if abs(self.x_grid[i] - x) > 1e-9 * max(1.0, abs(x)):
            raise AlignmentError(f"x={x} not on the sheet x-grid (nearest {self.x_grid[i]})")
        return i

    def y_index(self, y: float) -> int:
        i = int(np.argmin(np.abs(self.y_grid - y)))
        if abs(self.y_grid[i] - y) > 1e-9 * max(1.0, abs(y)):
            raise AlignmentError(f"y={y} not on the sheet y-grid (nearest {self.y_grid[i]})")
        return i

    def value(self, x: float, y: float) -> float:
        return float(self.values[self.x_index(x), self.y_index(y)])


@dataclass(frozen=True)
class SemiInfiniteAnchor:
    x: float
    k: int

    def __post_init__(self) -> None:
        if not (self.x > 0):
            raise DomainError(f"direction parameter must be positive, got {self.x}")
        if self.k < 1:
            raise DomainError(f"anchor level must be >= 1, got {self.k}")

    @property
    def anchor_point(self) -> tuple[float, int]:
        return (-math.sqrt(self.k / (2.0 * self.x)), self.k)

    @classmethod
    def from_time(cls, anchor_time: float, k: int) -> "SemiInfiniteAnchor":
        """Anchor whose time coordinate is the given (negative) value."""
        if not (anchor_time < 0):
            raise DomainError(f"anchor time must be negative, got {anchor_time}")
        return cls(x=k / (2.0 * anchor_time * anchor_time), k=k)


# ---------------------------------------------------------------------------
# Ensemble and sheet samplers
# ---------------------------------------------------------------------------


def _airy_lines_from_driving(
    driving: LineEnsembleGrid,
    n: int,
    dt: float,
    k: int,
    t_lo: float,
    t_hi: float,
    normalization: str,
) -> tuple[Grid, np.ndarray]:
    """Top-k melon lines of the driving, edge-rescaled, on real columns of [t_lo, t_hi]."""
    j0 = driving.grid.index_of(0.0)
    sub = LineEnsembleGrid(
        Grid(0.0, driving.grid.dt, driving.grid.n_points - j0),
        driving.lines[:, j0:],
    )
    mel = melon_top(sub, k)
    cols = real_columns(mel, dt)
    times = mel.grid.times[cols]
    vals = mel.lines[:, cols]
    i_lo = int(np.searchsorted(times, t_lo - 0.5 * dt))
    i_hi = int(np.searchsorted(times, t_hi + 0.5 * dt)) - 1
    times = times[i_lo : i_hi + 1]
    vals = vals[:, i_lo : i_hi + 1]
    scaled = _normalize(vals, times, n, normalization)
    c = n ** (1.0 / 3.0) / 2.0
    y_grid = Grid(float((times[0] - 1.0) * c), dt * c, times.size)
    return y_grid, scaled


def sample_airy_ensemble(
    n: int,
    y_max: float,
    dt: float,
    rng: RngStream,
    lines: int = 1,
    normalization: str = "affine",
) -> AiryEnsembleApprox:
    """Top lines of the edge-rescaled melon on the window [-y_max, y_max].

    normalization="affine" recentres by the deterministic 2 sqrt(n) and the
    slope term only (exact coupling with sheets); "shape_exact" also divides
    out the sqrt(T_y) fluctuation scale, making the one-point law exactly
    the n-level matrix edge law at every y.
    """
    if y_max <= 0:
        raise DomainError(f"y_max must be positive, got {y_max}")
    if 2.0 * y_max * n ** (-1.0 / 3.0) >= 1.0:
        raise DomainError(f"window y_max={y_max} too wide for n={n}: T_y would reach 0")
    k = min(lines, n)
    t_hi = airy_time(n, y_max)
    driving = sample_driving(n, 0.0, t_hi, dt, rng)
    t_lo = airy_time(n, -y_max)
    y_grid, scaled = _airy_lines_from_driving(driving, n, dt, k, t_lo, t_hi, normalization)
    ens = LineEnsembleGrid(y_grid, scaled)
    window = (float(y_grid.times[0]), float(y_grid.t_end))
    return AiryEnsembleApprox(n=n, ensemble=ens, window=window, normalization=normalization)


def stationary_view(a: AiryEnsembleApprox) -> AiryEnsembleApprox:
    """Add y^2 to every line pointwise. Not idempotent: applying twice adds it twice."""
    y = a.y_grid.times
    shifted = a.ensemble.lines + y * y
    return AiryEnsembleApprox(
        n=a.n,
        ensemble=LineEnsembleGrid(a.y_grid, shifted),
        window=a.window,
        normalization=a.normalization,
    )


def _real_index_of(driving: LineEnsembleGrid, dt: float, t: np.ndarray) -> np.ndarray:
    """Column indices of the times t snapped to the real (pre-refinement) grid."""
    step = round(dt / driving.grid.dt)
    j = np.rint((np.asarray(t) - driving.grid.times[0]) / dt).astype(np.int64)
    j = np.clip(j, 0, (driving.grid.n_points - 1) // step)
    return step * j


def _raw_sheet_values(
    driving: LineEnsembleGrid,
    n: int,
    dt: float,
    anchor_idx: np.ndarray,
    target_idx: np.ndarray,
) -> np.ndarray:
    """Unit-scale sheet values for all anchor x target combinations, one DP per anchor."""
    lines = driving.lines
    times = driving.grid.times
    n16 = n ** (1.0 / 6.0)
    n23 = n ** (2.0 / 3.0)
    out = np.empty((anchor_idx.size, target_idx.size))
    for a, ja in enumerate(anchor_idx):
        offsets = np.full(lines.shape[1], -np.inf)
        offsets[ja] = 0.0
        d = dp_top(lines, offsets)
        lpp_vals = d[target_idx]
        out[a] = n16 * (lpp_vals - 2.0 * math.sqrt(n)) - (times[target_idx] - 1.0 - times[ja]) * n23
    return out


def sample_airy_sheet(
    n: int,
    x_window: tuple[float, float],
    y_window: tuple[float, float],
    dt: float,
    rng: RngStream,
    n_x: int = 60,
    n_y: int | None = None,
    scale: float = 1.0,
) -> SheetSample:
    """Two-parameter sheet on x_window x y_window (physical, scale-s coordinates).

    S_s(x, y) = s * S(x/s^2, y/s^2) with S the unit-scale sheet; the raw value
    is the recentred last passage value between the scaled endpoints. When the
    x-window starts at 0 the driving grid starts at 0 and the pinning makes
    S(0, .) coincide with the ensemble top line from the same stream exactly.
    """
    if n_y is None:
        n_y = n_x
    if n_x < 2 or n_y < 2:
        raise DomainError("sheet grids need at least 2 points per axis")
    s2 = scale * scale
    u_lo, u_hi = x_window[0] / s2, x_window[1] / s2
    v_lo, v_hi = y_window[0] / s2, y_window[1] / s2
    if u_lo >= u_hi or v_lo >= v_hi:
        raise DomainError("windows must be nonempty intervals")
    third = n ** (-1.0 / 3.0)
    if 1.0 + 2.0 * (v_lo - u_hi) * third <= 0.05:
        raise DomainError(
            f"window too wide for n={n}: corner pair (x_hi, y_lo) leaves no time span"
        )
    t_start = min(0.0, 2.0 * u_lo * third)
    t_end = airy_time(n, v_hi)
    driving = sample_driving(n, t_start, t_end, dt, rng)
    raw_x = np.linspace(u_lo, u_hi, n_x)
    raw_y = np.linspace(v_lo, v_hi, n_y)
    anchor_idx = np.unique(_real_index_of(driving, dt, 2.0 * raw_x * third))
    j_target = np.unique(_real_index_of(driving, dt, airy_time(n, raw_y)))
    if anchor_idx.size != n_x or j_target.size != n_y:
        raise DomainError("requested sheet resolution is finer than the driving grid")
    raw = _raw_sheet_values(driving, n, dt, anchor_idx, j_target)
    x_phys = s2 * (driving.grid.times[anchor_idx] * n ** (1.0 / 3.0) / 2.0)
    y_phys = s2 * airy_coord(n, driving.grid.times[j_target])
    return SheetSample(x_grid=x_phys, y_grid=y_phys, values=scale * raw, scale=scale)


def rescale_sheet(sheet: SheetSample, new_scale: float) -> SheetSample:
    """Exact re-indexing to a different scale: coordinates scale by (s'/s)^2, values by s'/s."""
    if new_scale <= 0:
        raise DomainError(f"scale must be positive, got {new_scale}")
    r = new_scale / sheet.scale
    return SheetSample(
        x_grid=sheet.x_grid * (r * r),
        y_grid=sheet.y_grid * (r * r),
        values=sheet.values * r,
        scale=new_scale,
    )


# ---------------------------------------------------------------------------
# Semi-infinite machinery: coupling residuals, boundary data, jump times
# ---------------------------------------------------------------------------


def _ensemble_lpp_all_levels(lines: np.ndarray, j_anchor: int, j_target: int) -> np.ndarray:
    """Last passage from (j_anchor, bottom row) to (j_target, every row)."""
    offsets = np.full(lines.shape[1], -np.inf)
    offsets[j_anchor] = 0.0
    d = dp_all(np.ascontiguousarray(lines), offsets)
    return d[:, j_target]


def coupling_residual(
    sheet: SheetSample,
    driving: LineEnsembleGrid,
    n: int,
    dt: float,
    x: float,
    y: float,
    z: float,
    k: int,
) -> float:
    """|(S(x,z) - S(x,y)) - (lpp(anchor_k -> (z,1)) - lpp(anchor_k -> (y,1)))|.

    The anchor is the depth-k proxy for the semi-infinite geodesic in
    direction x, sitting at (-sqrt(k/(2x)), k) in ensemble coordinates; the
    lpp runs across the top-k rescaled melon lines of the same driving.

    The sheet stores grid-snapped coordinates, so x, y, z are first snapped
    onto its grids; both sides of the residual are then evaluated at the
    same physical columns. The sheet must have been sampled within one
    driving step of each requested coordinate.
    """
    if sheet.scale != 1.0:
        raise DomainError("coupling residuals are defined for unit-scale sheets")
    quantum = dt * n ** (1.0 / 3.0) + 1e-9
    x_s = _snap_coord(sheet.x_grid, x, quantum, "x")
    y_s = _snap_coord(sheet.y_grid, y, quantum, "y")
    z_s = _snap_coord(sheet.y_grid, z, quantum, "z")
    anchor = SemiInfiniteAnchor(x=x, k=k)
    y_a = anchor.anchor_point[0]
    t_lo = airy_time(n, y_a)
    t_hi = airy_time(n, max(y_s, z_s))
    if t_lo <= 0:
        raise DomainError(f"anchor at y={y_a} outside the valid window for n={n}")
    y_grid, lines = _airy_lines_from_driving(driving, n, dt, k, t_lo, t_hi, "affine")
    d = dp_all(np.ascontiguousarray(lines), _delta_offsets(lines.shape[1], 0))
    top = d[0]
    lpp_y = top[y_grid.index_of(_snap(y_grid, y_s))]
    lpp_z = top[y_grid.index_of(_snap(y_grid, z_s))]
    sheet_diff = sheet.value(x_s, z_s) - sheet.value(x_s, y_s)
    return float(abs(sheet_diff - (lpp_z - lpp_y)))


def _snap_coord(grid: np.ndarray, c: float, tol: float, name: str) -> float:
    i = int(np.argmin(np.abs(grid - c)))
    nearest = float(grid[i])
    if abs(nearest - c) > tol:
        raise AlignmentError(f"sheet has no sample near {name}={c} (nearest {nearest})")
    return nearest


def _snap(grid: Grid, t: float) -> float:
    j = int(np.clip(round((t - float(grid.times[0])) / grid.dt), 0, grid.n_points - 1))
    return float(grid.times[j])


def boundary_data(
    driving: LineEnsembleGrid,
    h0,
    k_max: int,
    n: int,
    dt: float,
    anchor_y: float = -2.0,
) -> tuple[BoundaryData, dict]:
    """Boundary values G_l = max-plus data at the origin plus the level-l anchor bracket.

    G_l = max over support x of (h0(x) + S(x, 0)) + [lpp(anchor -> (0, l)) - lpp(anchor -> (0, 1))],
    where the lpp runs across the top-k_max ensemble lines and the anchor is
    the level-k_max semi-infinite proxy at y = anchor_y. h0 is anything with
    support_points() -> (xs, values), or a plain (xs, values) pair.
    """
    xs, h_vals = h0.support_points() if hasattr(h0, "support_points") else h0
    xs = np.asarray(xs, dtype=np.float64)
    h_vals = np.asarray(h_vals, dtype=np.float64)
    if xs.size == 0:
        raise EmptySupportError("initial data has empty max-plus support")
    if k_max < 2 or k_max > n:
        raise DomainError(f"k_max={k_max} outside 2..{n}")
    anchor = SemiInfiniteAnchor.from_time(anchor_y, k_max)

    # Sheet column S(., 0): one DP in the reversed environment.
    third = n ** (-1.0 / 3.0)
    anchor_times = 2.0 * xs * third
    if np.any(anchor_times >= 1.0):
        raise DomainError("support reaches past the output time; shrink it or raise n")
    j_x = _real_index_of(driving, dt, anchor_times)
    rev = reversed_environment(driving)
    j_rev_anchor = rev.grid.index_of(-1.0)
    d_rev = dp_top(rev.lines, _delta_offsets(rev.grid.n_points, j_rev_anchor))
    j_x_rev = (rev.grid.n_points - 1) - j_x
    t_x = driving.grid.times[j_x]
    s_col = n ** (1.0 / 6.0) * (d_rev[j_x_rev] - 2.0 * math.sqrt(n)) + t_x * n ** (2.0 / 3.0)
    base = float(np.max(h_vals + s_col))

    t_lo = airy_time(n, anchor_y)
    if t_lo <= 0:
        raise DomainError(f"anchor y={anchor_y} outside the valid window for n={n}")
    y_grid, lines = _airy_lines_from_driving(driving, n, dt, k_max, t_lo, 1.0, "affine")
    j0 = y_grid.index_of(_snap(y_grid, 0.0))
    bracket = _ensemble_lpp_all_levels(lines, 0, j0)
    bracket = bracket - bracket[0]
    values = base + bracket
    strict = bool(np.all(np.diff(values) < 0))
    info = {
        "anchor": anchor.anchor_point,
        "direction_x": anchor.x,
        "strict": strict,
        "base_height": base,
    }
    return BoundaryData(values=values, strict=False), info


def _delta_offsets(n_points: int, j: int) -> np.ndarray:
    offsets = np.full(n_points, -np.inf)
    offsets[j] = 0.0
    return offsets


def geodesic_jump_time(
    environment: LineEnsembleGrid,
    anchor: SemiInfiniteAnchor,
    target: tuple[float, int],
    level: int,
    n: int | None = None,
    dt: float | None = None,
) -> float:
    """First time the rightmost geodesic from the anchor to the target reaches the level.

    With n and dt given, the environment is raw driving data: the top
    anchor.k melon lines are built and rescaled first. Without them the
    environment is used as-is (already in target coordinates), which is what
    the deterministic and two-line control examples do.
    """
    target_y, target_level = target
    if not 1 <= target_level <= anchor.k:
        raise DomainError(f"target level {target_level} outside 1..{anchor.k}")
    if not target_level <= level <= anchor.k:
        raise DomainError(f"queried level {level} outside {target_level}..{anchor.k}")
    y_a = anchor.anchor_point[0]
    if n is not None and dt is not None:
        t_lo = airy_time(n, y_a)
        if t_lo <= 0:
            raise DomainError(f"anchor at y={y_a} outside the valid window for n={n}")
        y_grid, lines = _airy_lines_from_driving(
            environment, n, dt, anchor.k, t_lo, airy_time(n, target_y), "affine"
        )
    else:
        if environment.n_lines < anchor.k:
            raise DomainError(f"environment has {environment.n_lines} lines, anchor needs {anchor.k}")
        y_grid = environment.grid
        lines = environment.lines[: anchor.k]
        if y_a < y_grid.times[0] - 1e-9:
            raise DomainError(f"anchor time {y_a} precedes the environment start")
    j_anchor = y_grid.index_of(_snap(y_grid, y_a))
    if level == anchor.k:
        return float(y_grid.times[j_anchor])
    sub = np.ascontiguousarray(lines[target_level - 1 : anchor.k])
    j_target = y_grid.index_of(_snap(y_grid, target_y))
    if j_target <= j_anchor:
        raise DomainError("target time must lie strictly after the anchor time")
    d = dp_all(sub, _delta_offsets(sub.shape[1], j_anchor))
    jumps = backtrack_rightmost(sub, d, j_anchor, j_target)
    # jumps[r] is the jump onto sub-row r, i.e. onto level target_level + r.
    return float(y_grid.times[jumps[level - target_level]])
