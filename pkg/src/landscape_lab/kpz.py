"""Height evolution by the variational formula, plus records, quadrangles, coalescence.

h_t(y) = max over x of (h0(x) + S_t(x, y)) with S_t the scale-t^{1/3} sheet.
The maximization is folded into the last passage dynamic programming pass:
initial data enters as column offsets at its support anchors, so one sweep
per profile regardless of how many support points there are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import dp_top
from .airy import (
    SheetSample,
    _real_index_of,
    airy_coord,
    airy_time,
    sample_driving,
)
from .errors import (
    DomainError,
    EmptySupportError,
    FinitaryError,
    GridMismatchError,
    WindowTooSmallError,
)
from .grids import Grid, GridFunction
from .lpp import LineEnsembleGrid
from .rng import RngStream


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------


class InitialData:
    """Base for upper semicontinuous initial height profiles, -inf off support."""

    def bounded_support(self) -> bool:
        raise NotImplementedError

    def support_intervals(self) -> tuple[tuple[float, float], ...]:
        raise NotImplementedError

    def support_points(self, dx: float = 0.005) -> tuple[np.ndarray, np.ndarray]:
        """Concrete (xs, h(xs)) pairs for max-plus evaluation; dx sets interval resolution."""
        raise NotImplementedError

    def growth_coeff(self) -> float:
        """Certified c with h0(x) <= A + c x^2 for some A. 0 for bounded support."""
        return 0.0


@dataclass(frozen=True)
class NarrowWedges(InitialData):
    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.points) == 0:
            raise EmptySupportError("a wedge profile needs at least one point")
        xs = [p[0] for p in self.points]
        if len(set(xs)) != len(xs):
            raise DomainError("wedge locations must be distinct")
        pts = tuple(sorted((float(x), float(v)) for x, v in self.points))
        object.__setattr__(self, "points", pts)

    def bounded_support(self) -> bool:
        return True

    def support_intervals(self) -> tuple[tuple[float, float], ...]:
        return tuple((x, x) for x, _ in self.points)

    def support_points(self, dx: float = 0.005) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([x for x, _ in self.points])
        vs = np.array([v for _, v in self.points])
        return xs, vs


@dataclass(frozen=True)
class Flat(InitialData):
    level: float = 0.0
    support: tuple[float, float] | None = None  # None: the whole line

    def __post_init__(self) -> None:
        if self.support is not None and not (self.support[0] <= self.support[1]):
            raise DomainError(f"empty support interval {self.support}")

    def bounded_support(self) -> bool:
        return self.support is not None

    def support_intervals(self) -> tuple[tuple[float, float], ...]:
        if self.support is None:
            return ((-math.inf, math.inf),)
        return (tuple(self.support),)

    def support_points(self, dx: float = 0.005) -> tuple[np.ndarray, np.ndarray]:
        if self.support is None:
            raise DomainError("unbounded flat data has no finite support listing")
        a, b = self.support
        m = max(2, int(round((b - a) / dx)) + 1)
        xs = np.linspace(a, b, m)
        return xs, np.full(m, self.level)


@dataclass(frozen=True)
class Sampled(InitialData):
    grid: Grid
    values: np.ndarray = field(repr=False)
    mask: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n_points,):
            raise DomainError(f"values shape {v.shape} does not match grid ({self.grid.n_points},)")
        m = self.mask
        m = np.ones(v.size, dtype=bool) if m is None else np.ascontiguousarray(m, dtype=bool)
        if m.shape != v.shape:
            raise DomainError("mask shape does not match values")
        if not m.any():
            raise EmptySupportError("all sample points are masked out")
        if not np.all(np.isfinite(v[m])):
            raise DomainError("unmasked sample values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)

    def bounded_support(self) -> bool:
        return True

    def support_intervals(self) -> tuple[tuple[float, float], ...]:
        xs = self.grid.times[self.mask]
        return ((float(xs[0]), float(xs[-1])),)

    def support_points(self, dx: float = 0.005) -> tuple[np.ndarray, np.ndarray]:
        return self.grid.times[self.mask].copy(), self.values[self.mask].copy()


@dataclass(frozen=True)
class Parametric(InitialData):
    description: str
    fn: object = field(repr=False)  # callable x -> h0(x), vectorized or scalar
    coeff: float = 0.0  # certified quadratic growth: h0(x) <= A + coeff * x^2
    support: tuple[float, float] | None = None

    def bounded_support(self) -> bool:
        return self.support is not None

    def support_intervals(self) -> tuple[tuple[float, float], ...]:
        if self.support is None:
            return ((-math.inf, math.inf),)
        return (tuple(self.support),)

    def _eval(self, xs: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(xs), dtype=np.float64)
        if out.shape != xs.shape:
            out = np.array([float(self.fn(float(x))) for x in xs])
        return out

    def support_points(self, dx: float = 0.005) -> tuple[np.ndarray, np.ndarray]:
        if self.support is None:
            raise DomainError("unbounded parametric data has no finite support listing")
        a, b = self.support
        m = max(2, int(round((b - a) / dx)) + 1)
        xs = np.linspace(a, b, m)
        return xs, self._eval(xs)

    def growth_coeff(self) -> float:
        return 0.0 if self.support is not None else float(self.coeff)


def make_initial(kind: str, restrict: tuple[float, float] | None = None, **params) -> InitialData:
    """Build initial data by name: flat, wedges, sampled, parametric.

    restrict=(a, b) intersects the support with [a, b] after construction;
    an intersection that removes everything raises EmptySupportError.
    """
    if kind == "flat":
        data: InitialData = Flat(level=params.get("level", 0.0), support=params.get("support"))
    elif kind == "wedges":
        data = NarrowWedges(points=tuple(tuple(p) for p in params["points"]))
    elif kind == "sampled":
        data = Sampled(grid=params["grid"], values=params["values"], mask=params.get("mask"))
    elif kind == "parametric":
        data = Parametric(
            description=params.get("description", "parametric"),
            fn=params["fn"],
            coeff=params.get("coeff", 0.0),
            support=params.get("support"),
        )
    else:
        raise DomainError(f"unknown initial data kind {kind!r}")
    if restrict is None:
        return data
    a, b = restrict
    if isinstance(data, NarrowWedges):
        kept = tuple(p for p in data.points if a <= p[0] <= b)
        if not kept:
            raise EmptySupportError(f"no wedge survives restriction to [{a}, {b}]")
        return NarrowWedges(points=kept)
    if isinstance(data, Flat):
        lo, hi = data.support if data.support is not None else (a, b)
        lo, hi = max(lo, a), min(hi, b)
        if lo > hi:
            raise EmptySupportError(f"flat support misses [{a}, {b}]")
        return Flat(level=data.level, support=(lo, hi))
    if isinstance(data, Sampled):
        mask = data.mask & (data.grid.times >= a) & (data.grid.times <= b)
        if not mask.any():
            raise EmptySupportError(f"no sample point survives restriction to [{a}, {b}]")
        return Sampled(grid=data.grid, values=data.values, mask=mask)
    lo, hi = data.support if data.support is not None else (a, b)
    lo, hi = max(lo, a), min(hi, b)
    if lo > hi:
        raise EmptySupportError(f"parametric support misses [{a}, {b}]")
    return Parametric(description=data.description, fn=data.fn, coeff=data.coeff, support=(lo, hi))


# ---------------------------------------------------------------------------
# Finitary admissibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinitaryReport:
    ok: bool
    witness: float | None
    detail: str


def validate_finitary(h0: InitialData, t: float) -> FinitaryReport:
    """Does (h0(x) - x^2/t)/|x| -> -inf, so the horizon-t variational problem is finite?

    Bounded support passes outright. Unbounded data is judged by its growth
    certificate (h0 <= A + c x^2 is admissible at horizon t iff t*c < 1),
    cross-checked by dyadic probes of the actual decay ratio; the first large
    probe where the ratio fails to diverge is returned as the witness.
    """
    if t <= 0:
        raise DomainError(f"time horizon must be positive, got {t}")
    if h0.bounded_support():
        return FinitaryReport(ok=True, witness=None, detail="bounded support")
    c = h0.growth_coeff()
    cert_ok = t * c < 1.0
    if isinstance(h0, Flat):
        return FinitaryReport(ok=True, witness=None, detail="flat growth")
    if isinstance(h0, Parametric):
        # Small probes say nothing about the tail, so only |x| >= 2^16 count.
        probes = np.concatenate([2.0 ** np.arange(16, 21), -(2.0 ** np.arange(16, 21))])
        ratio = (h0._eval(probes) - probes * probes / t) / np.abs(probes)
        bad = np.flatnonzero(ratio > -1e-6)
        witness = float(probes[bad[0]]) if bad.size else None
        ok = cert_ok and witness is None
        detail = f"certificate t*c = {t * c:.6g}" + ("" if witness is None else ", probe ratio not diverging")
        return FinitaryReport(ok=ok, witness=witness, detail=detail)
    return FinitaryReport(ok=cert_ok, witness=None, detail="growth certificate only")


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------


def _fused_profile(
    driving: LineEnsembleGrid,
    n: int,
    s: float,
    anchor_idx: np.ndarray,
    w_offsets: np.ndarray,
    target_idx: np.ndarray,
) -> np.ndarray:
    """One DP sweep: h(y) at the target columns with data folded in as offsets."""
    offsets = np.full(driving.grid.n_points, -np.inf)
    np.maximum.at(offsets, anchor_idx, w_offsets)
    d = dp_top(driving.lines, offsets)
    t_v = driving.grid.times[target_idx]
    n23 = n ** (2.0 / 3.0)
    return s * (n ** (1.0 / 6.0) * d[target_idx] - 2.0 * n23 - (t_v - 1.0) * n23)


def _offsets_for(h0_vals: np.ndarray, t_u: np.ndarray, n: int, s: float) -> np.ndarray:
    # w(u) = (h0 + s * t_u * n^{2/3}) / (s n^{1/6}); the t_u term is the sheet's
    # slope recentring folded back so a plain lpp offset maximization applies.
    return h0_vals / (s * n ** (1.0 / 6.0)) + t_u * math.sqrt(n)


def _anchor_table(
    h0: InitialData, s: float, u_lo: float, u_hi: float, dx_phys: float
) -> tuple[np.ndarray, np.ndarray]:
    """Physical support points and values; unbounded data is truncated to raw [u_lo, u_hi]."""
    s2 = s * s
    if h0.bounded_support():
        return h0.support_points(dx=dx_phys)
    a, b = s2 * u_lo, s2 * u_hi
    m = max(2, int(round((b - a) / dx_phys)) + 1)
    xs = np.linspace(a, b, m)
    if isinstance(h0, Flat):
        return xs, np.full(m, h0.level)
    return xs, h0._eval(xs)  # type: ignore[union-attr]


def evolve(
    h0: InitialData,
    t: float,
    rng: RngStream,
    n: int = 100,
    dt: float = 2e-4,
    y_window: tuple[float, float] = (-1.0, 1.0),
    slack: float = 10.0,
    max_doublings: int = 3,
) -> GridFunction:
    """Height profile h_t on y_window from initial data h0, one sampled sheet deep.

    For unbounded data the support is truncated at a shape-bound radius with
    additive slack; the truncation is accepted only if removing the outermost
    anchors changes nothing, otherwise the radius doubles (fresh sample).
    WindowTooSmallError if max_doublings is exhausted.
    """
    report = validate_finitary(h0, t)
    if not report.ok:
        raise FinitaryError(f"initial data not admissible at t={t}: {report.detail}")
    if y_window[0] >= y_window[1]:
        raise DomainError("y_window must be a nonempty interval")
    s = t ** (1.0 / 3.0)
    s2 = s * s
    v_lo, v_hi = y_window[0] / s2, y_window[1] / s2
    c = h0.growth_coeff()
    stretch = 1.0 / max(1e-9, 1.0 - t * c)
    radius = (math.sqrt(slack + 2.0) + max(abs(v_lo), abs(v_hi)) * (stretch - 1.0)) if not h0.bounded_support() else 0.0

    for attempt in range(max_doublings + 1):
        sub_rng = rng.substream(attempt) if attempt else rng
        u_lo, u_hi = v_lo - radius, v_hi + radius
        dx_phys = s2 * dt * n ** (1.0 / 3.0) / 2.0
        xs_phys, h_vals = _anchor_table(h0, s, u_lo, u_hi, dx_phys)
        if xs_phys.size == 0:
            raise EmptySupportError("initial data has no support points")
        us = xs_phys / s2
        third = n ** (-1.0 / 3.0)
        t_anchor = 2.0 * us * third
        t_lo_out = airy_time(n, v_lo)
        if t_anchor.min() >= t_lo_out:
            raise DomainError("support lies entirely after the earliest output time")
        t_start = min(0.0, float(t_anchor.min()))
        t_end = airy_time(n, v_hi)
        driving = sample_driving(n, t_start, t_end, dt, sub_rng)
        anchor_idx = _real_index_of(driving, dt, t_anchor)
        w = _offsets_for(h_vals, driving.grid.times[anchor_idx], n, s)
        lo_idx = _real_index_of(driving, dt, np.array([t_lo_out]))[0]
        hi_idx = _real_index_of(driving, dt, np.array([t_end]))[0]
        step = round(dt / driving.grid.dt)
        target_idx = np.arange(lo_idx, hi_idx + 1, step)
        if target_idx.size < 2:
            raise DomainError("y_window is below the grid resolution; widen it or lower dt")
        h = _fused_profile(driving, n, s, anchor_idx, w, target_idx)
        if h0.bounded_support():
            break
        # Truncation audit: drop the outer 10 percent of anchors on each side;
        # identical output means the cut anchors were never optimal.
        order = np.argsort(anchor_idx)
        m = anchor_idx.size
        cut = max(1, m // 10)
        inner = order[cut : m - cut]
        if inner.size == 0:
            raise WindowTooSmallError("truncation window degenerate")
        h_inner = _fused_profile(driving, n, s, anchor_idx[inner], w[inner], target_idx)
        if np.array_equal(h, h_inner):
            break
        radius *= 2.0
    else:
        raise WindowTooSmallError(
            f"support truncation did not stabilize after {max_doublings} doublings"
        )
    y_phys = s2 * airy_coord(n, driving.grid.times[target_idx])
    y_grid = Grid(float(y_phys[0]), float(y_phys[1] - y_phys[0]), y_phys.size)
    return GridFunction(y_grid, h)


def evolve_coupled(
    datas: list[InitialData],
    t: float,
    rng: RngStream,
    n: int = 100,
    dt: float = 2e-4,
    y_window: tuple[float, float] = (-1.0, 1.0),
    slack: float = 10.0,
) -> list[GridFunction]:
    """Profiles for several initial datas driven by one shared environment.

    This is the coupling used for coalescence experiments: differences of the
    returned profiles are meaningful pathwise, not only in law. Unbounded
    datas are truncated at the slack radius without the doubling audit, so
    callers should pick slack generously.
    """
    if not datas:
        raise DomainError("need at least one initial data")
    for h0 in datas:
        report = validate_finitary(h0, t)
        if not report.ok:
            raise FinitaryError(f"initial data not admissible at t={t}: {report.detail}")
    s = t ** (1.0 / 3.0)
    s2 = s * s
    v_lo, v_hi = y_window[0] / s2, y_window[1] / s2
    radius = math.sqrt(slack + 2.0)
    dx_phys = s2 * dt * n ** (1.0 / 3.0) / 2.0
    tables = [_anchor_table(h0, s, v_lo - radius, v_hi + radius, dx_phys) for h0 in datas]
    third = n ** (-1.0 / 3.0)
    t_min = min(0.0, min(float(np.min(2.0 * xs / s2 * third)) for xs, _ in tables))
    t_end = airy_time(n, v_hi)
    driving = sample_driving(n, t_min, t_end, dt, rng)
    lo_idx = _real_index_of(driving, dt, np.array([airy_time(n, v_lo)]))[0]
    hi_idx = _real_index_of(driving, dt, np.array([t_end]))[0]
    step = round(dt / driving.grid.dt)
    target_idx = np.arange(lo_idx, hi_idx + 1, step)
    if target_idx.size < 2:
        raise DomainError("y_window is below the grid resolution; widen it or lower dt")
    y_phys = s2 * airy_coord(n, driving.grid.times[target_idx])
    y_grid = Grid(float(y_phys[0]), float(y_phys[1] - y_phys[0]), y_phys.size)
    out = []
    for xs_phys, h_vals in tables:
        t_anchor = 2.0 * (xs_phys / s2) * third
        anchor_idx = _real_index_of(driving, dt, t_anchor)
        w = _offsets_for(h_vals, driving.grid.times[anchor_idx], n, s)
        h = _fused_profile(driving, n, s, anchor_idx, w, target_idx)
        out.append(GridFunction(y_grid, h))
    return out


# ---------------------------------------------------------------------------
# Metric composition
# ---------------------------------------------------------------------------


def compose(first: SheetSample, second: SheetSample) -> SheetSample:
    """Max-plus composition: (second o first)(x, y) = max_z first(x, z) + second(z, y).

    first's y-grid must coincide with second's x-grid. Scales combine as
    times add: s = (s1^3 + s2^3)^{1/3}.
    """
    if first.y_grid.size != second.x_grid.size or np.max(
        np.abs(first.y_grid - second.x_grid)
    ) > 1e-9 * max(1.0, float(np.max(np.abs(first.y_grid)))):
        raise GridMismatchError("composition needs first.y_grid == second.x_grid")
    vals = (first.values[:, :, None] + second.values[None, :, :]).max(axis=1)
    scale = (first.scale**3 + second.scale**3) ** (1.0 / 3.0)
    return SheetSample(x_grid=first.x_grid, y_grid=second.y_grid, values=vals, scale=scale)


# ---------------------------------------------------------------------------
# Records, quadrangles, coalescence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecordSet:
    a: float
    times: np.ndarray

    @property
    def count(self) -> int:
        return int(self.times.size)


def record_times(profile: GridFunction, a: float, tol: float = 0.0) -> RecordSet:
    """Grid points y >= a where h(y) >= max over [a, y] of h, within tol.

    tol=0 keeps exact running-maximum attainment only; each new running
    maximum is a record, including the left endpoint.
    """
    grid = profile.grid
    if a < grid.times[0] - 1e-12 or a > grid.t_end + 1e-12:
        raise DomainError(f"a={a} outside the profile window")
    j0 = int(np.searchsorted(grid.times, a - 1e-12))
    vals = profile.values[j0:]
    run = np.maximum.accumulate(vals)
    rec = vals >= run - tol
    return RecordSet(a=float(grid.times[j0]), times=grid.times[j0:][rec].copy())


@dataclass(frozen=True)
class QuadrangleCDF:
    base: tuple[float, float]
    x_grid: np.ndarray
    y_grid: np.ndarray
    values: np.ndarray = field(repr=False)  # F(x, y), zero on the base axes

    def __post_init__(self) -> None:
        f = np.asarray(self.values, dtype=np.float64)
        if f.shape != (self.x_grid.size, self.y_grid.size):
            raise DomainError("F shape does not match grids")
        if f.min() < -1e-9:
            raise DomainError(f"quadrangle function dips to {f.min():.3e}")
        if np.abs(f[0]).max() != 0.0 or np.abs(f[:, 0]).max() != 0.0:
            raise DomainError("F must vanish on the base axes")
        if np.any(np.diff(f, axis=0) < -1e-9) or np.any(np.diff(f, axis=1) < -1e-9):
            raise DomainError("F must be non-decreasing in both arguments")

    def at(self, x: float, y: float) -> float:
        i = int(np.argmin(np.abs(self.x_grid - x)))
        j = int(np.argmin(np.abs(self.y_grid - y)))
        return float(self.values[i, j])


def quadrangle_cdf(sheet: SheetSample, base: tuple[float, float]) -> QuadrangleCDF:
    """F(x, y) = S(x,y) - S(x,y0) - S(x0,y) + S(x0,y0) on x >= x0, y >= y0."""
    x0, y0 = base
    i0 = sheet.x_index(x0)
    j0 = sheet.y_index(y0)
    s = sheet.values
    # Grouped so the base row and column are exact zeros in float arithmetic.
    f = (s[i0:, j0:] - s[i0:, j0][:, None]) - (s[i0, j0:] - s[i0, j0])[None, :]
    return QuadrangleCDF(
        base=(float(sheet.x_grid[i0]), float(sheet.y_grid[j0])),
        x_grid=sheet.x_grid[i0:].copy(),
        y_grid=sheet.y_grid[j0:].copy(),
        values=f,
    )


def delta_m(sheet: SheetSample, base: tuple[float, float], m: float) -> float:
    """The quadrangle increment F(x0 + m, y0 + m); zero iff the sheet locally splits."""
    if m <= 0:
        raise DomainError(f"offset m must be positive, got {m}")
    cdf = quadrangle_cdf(sheet, base)
    return cdf.at(cdf.base[0] + m, cdf.base[1] + m)


def coalescence_tau(
    profile_a: GridFunction,
    profile_b: GridFunction,
    y: float,
    tol: float = 1e-6,
) -> float | None:
    """Smallest grid time tau > y past which the profiles share all increments within tol.

    Agreement of increments means the profile difference is constant on
    [tau, end]; the constant itself (set by history before tau) is irrelevant,
    so the difference is compared against its own end value. Returns None
    when even the final grid step still disagrees.
    """
    if profile_a.grid != profile_b.grid:
        raise GridMismatchError("coalescence needs profiles on one grid")
    grid = profile_a.grid
    j_y = grid.index_of(_nearest(grid, y))
    if j_y >= grid.n_points - 1:
        raise DomainError("y must lie strictly before the window end")
    d = profile_a.values - profile_b.values
    tail = d[j_y + 1 :]
    bad = np.flatnonzero(np.abs(tail - tail[-1]) > tol)
    if bad.size == 0:
        return float(grid.times[j_y + 1])
    j_tau = j_y + 1 + int(bad[-1]) + 1
    # Agreement on the lone final point is vacuous: the last entry always
    # matches itself, so demand at least one full agreeing step.
    if j_tau >= grid.n_points - 1:
        return None
    return float(grid.times[j_tau])


def _nearest(grid: Grid, t: float) -> float:
    j = int(np.clip(round((t - float(grid.times[0])) / grid.dt), 0, grid.n_points - 1))
    return float(grid.times[j])
