"""End-to-end checks covering the laboratory's load-bearing claims.

``build_checks(seed)`` returns an ordered registry mapping check names to
thunks; each thunk produces a :class:`~landscape_lab.stats.TestReport` with a
one-line verdict and is safe to run through
:func:`~landscape_lab.stats.run_suite`.

Several checks consume the same Monte Carlo ensembles (one simulation pass,
several readers), so raw sample banks are cached per ``(seed, bank, size)``
for the life of the process.  Bank accessors are module-level functions with
adjustable trial counts; the registry always uses the full counts, while
pilot scripts may request smaller banks without touching the checks.

Report conventions: ``statistic`` is the quantity the verdict compares
against ``threshold``.  For distributional checks ``p_value`` carries a
Kolmogorov-Smirnov p-value; for frequency checks it carries the lower end of
the 95 percent Wilson interval, because the verdict there is about where the
interval sits rather than about a point null.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from ._kernels import dp_all, dp_top
from .airy import (
    SemiInfiniteAnchor,
    SheetSample,
    _real_index_of,
    airy_time,
    boundary_data,
    geodesic_jump_time,
    reversed_environment,
    sample_airy_sheet,
    sample_driving,
)
from .capacity import (
    CompactSetSpec,
    GridMeasure,
    bessel_riesz_energy,
    capacity,
    hitting_mc,
    parabolic_dim,
    thermal_energy,
)
from .errors import DomainError
from .grids import Grid, GridFunction, linspace_grid, same_grid
from .kpz import (
    Flat,
    NarrowWedges,
    Sampled,
    coalescence_tau,
    delta_m,
    evolve,
    evolve_coupled,
    record_times,
)
from .lpp import LineEnsembleGrid, melon, melon_top
from .rng import RngStream
from .sampling import sample_bm
from .stats import (
    TestReport,
    gue_lmax,
    ks_one_sample,
    ks_two_sample,
    make_report,
    run_suite,
    std_normal_cdf,
    wilson_ci,
)

# Stream ids, one per independent sample bank.  Frozen: changing any of them
# changes every report downstream of the same seed.
_S_MELON = 101
_S_COMPOSE = 102
_S_EDGE = 103
_S_GUE = 104
_S_SHEETS_WIDE = 105
_S_SHEETS_FINE = 106
_S_FLAT = 107
_S_BM = 108
_S_WEDGE = 109
_S_COUPLED = 110
_S_BOUNDARY = 111
_S_JUMP = 112
_S_JUMP_CTRL = 113
_S_ADDITIVE = 114
_S_HITTING = 115
_S_SEMI_DIRECT = 116
_S_SEMI_SPLIT = 117
_S_RAMP = 118

# Edge bank geometry: read-off coordinates and the finite size / step used
# for the one-point laws.  The corner-corrected discretization carries a
# positive O(sqrt(dt)) bias at the edge (~5 sqrt(dt) in scaled units), so the
# step here is finer than elsewhere in the suite.
_EDGE_N = 100
_EDGE_DT = 1e-4
_EDGE_YS = (-0.5, 0.0, 0.5)
EDGE_TRIALS = 10_000
STATIONARITY_TRIALS = 5_000

SHEET_WIDE_TRIALS = 1_000
SHEET_FINE_TRIALS = 2_000
_SHEET_M_VALUES = (0.25, 0.5, 1.0)

FLAT_TRIALS = 10_000
WEDGE_TRIALS = 10_000
BM_TRIALS = 10_000
JUMP_TRIALS = 10_000
RAMP_TRIALS = 10_000
COUPLED_TRIALS = 1_000
BOUNDARY_TRIALS = 1_000
ADDITIVE_TRIALS = 1_000
SEMI_DIRECT_TRIALS = 4_000
SEMI_SPLIT_TRIALS = 1_000
# The composed route runs two DPs and rescales by 2^(-1/3), so it inherits
# 2^(2/3) of the per-DP discretization bias while the direct route pays it
# once; at dt=4e-4 that asymmetry alone shifts the composed law by ~0.5.
# At 5e-5 the measured direct bias is +0.003 and the residual finite-n gap
# ~0.06, well inside the KS budget.
_SEMI_DT = 5e-5

# Support-event geometry: sampled ramp initial data evolved for a short time,
# so the profile tracks the ramp to within the band half-width with a
# frequency of order a percent.  At unit time the same band event has
# probability ~1e-5 and cannot be witnessed at 1e4 trials, hence the short
# horizon.  The band centre is frozen from a pilot run, not fitted per bank.
RAMP_SLOPE = 0.3
RAMP_T = 0.05
RAMP_LEVEL = -0.35
_RAMP_X0 = -0.42
_RAMP_DX = 0.02
_RAMP_POINTS = 93

_BANKS: dict[tuple, object] = {}


def _cached(key: tuple, build: Callable[[], object]) -> object:
    if key not in _BANKS:
        _BANKS[key] = build()
    return _BANKS[key]


def clear_banks() -> None:
    """Drop all cached sample banks (mainly for tests of the cache itself)."""
    _BANKS.clear()


def _delta(n_points: int, j: int) -> np.ndarray:
    off = np.full(n_points, -np.inf)
    off[j] = 0.0
    return off


def _walk_lines(sub: RngStream, k: int, n_points: int, dt: float, random_starts: bool) -> np.ndarray:
    """k independent Gaussian walks (rate 1 each), rows ordered top to bottom."""
    starts = sub.normals(k) if random_starts else np.zeros(k)
    inc = sub.normals((k, n_points - 1)) * math.sqrt(dt)
    lines = np.empty((k, n_points))
    lines[:, 0] = starts
    np.cumsum(inc, axis=1, out=lines[:, 1:])
    lines[:, 1:] += starts[:, None]
    return lines


# ---------------------------------------------------------------------------
# Sample banks


def edge_values(seed: int, trials: int = EDGE_TRIALS) -> tuple[np.ndarray, np.ndarray]:
    """Melon-top read-offs at three fixed times, one row per driving sample.

    Returns ``(times, raw)`` where ``times`` are the grid-snapped read-off
    times for ``_EDGE_YS`` and ``raw`` has shape ``(trials, 3)``.
    """

    def build() -> tuple[np.ndarray, np.ndarray]:
        n, dt = _EDGE_N, _EDGE_DT
        base = RngStream(seed, stream_id=_S_EDGE)
        targets = np.array([airy_time(n, y) for y in _EDGE_YS])
        t_hi = float(targets[-1])
        raw = np.empty((trials, len(_EDGE_YS)))
        times: np.ndarray | None = None
        for i in range(trials):
            env = sample_driving(n, 0.0, t_hi, dt, base.substream(i))
            cols = _real_index_of(env, dt, targets)
            if times is None:
                times = env.grid.times[cols].copy()
            raw[i] = melon_top(env, 1).lines[0][cols]
        assert times is not None
        return times, raw

    return _cached((seed, "edge", trials), build)  # type: ignore[return-value]


def gue_values(seed: int, trials: int = EDGE_TRIALS) -> np.ndarray:
    """Raw largest eigenvalues of the matched finite-size Gaussian ensemble."""

    def build() -> np.ndarray:
        return gue_lmax(_EDGE_N, trials, RngStream(seed, stream_id=_S_GUE))

    return _cached((seed, "gue", trials), build)  # type: ignore[return-value]


def sheet_deltas(seed: int, trials: int = SHEET_FINE_TRIALS) -> np.ndarray:
    """Coupling functional of sampled sheets at the square [0,M]^2, M in
    ``_SHEET_M_VALUES``; shape ``(trials, 3)``."""

    def build() -> np.ndarray:
        base = RngStream(seed, stream_id=_S_SHEETS_FINE)
        out = np.empty((trials, len(_SHEET_M_VALUES)))
        for i in range(trials):
            sheet = sample_airy_sheet(
                100, (0.0, 1.0), (0.0, 1.0), 4e-4, base.substream(i), n_x=5, n_y=5
            )
            out[i] = [delta_m(sheet, (0.0, 0.0), m) for m in _SHEET_M_VALUES]
        return out

    return _cached((seed, "sheet_deltas", trials), build)  # type: ignore[return-value]


def _profile_bank(
    seed: int,
    stream_id: int,
    h0,
    y_window: tuple[float, float],
    trials: int,
    t: float = 1.0,
) -> tuple[Grid, np.ndarray]:
    base = RngStream(seed, stream_id=stream_id)
    grid: Grid | None = None
    rows: np.ndarray | None = None
    for i in range(trials):
        prof = evolve(h0, t, base.substream(i), n=100, dt=4e-4, y_window=y_window)
        if grid is None:
            grid = prof.grid
            rows = np.empty((trials, grid.n_points))
        else:
            # The output grid is determined by the window alone; a mismatch
            # means the evolution changed its own geometry mid-bank.
            same_grid(prof.grid, grid)
        assert rows is not None
        rows[i] = prof.values
    assert grid is not None and rows is not None
    return grid, rows


def flat_profiles(seed: int, trials: int = FLAT_TRIALS) -> tuple[Grid, np.ndarray]:
    """Unit-time profiles from flat initial data on a window containing [0,1]."""
    return _cached(
        (seed, "flat", trials),
        lambda: _profile_bank(seed, _S_FLAT, Flat(0.0), (-0.05, 1.05), trials),
    )  # type: ignore[return-value]


def wedge_profiles(seed: int, trials: int = WEDGE_TRIALS) -> tuple[Grid, np.ndarray]:
    """Unit-time profiles from two equal wedges at 0 and 1, read between them."""
    h0 = NarrowWedges(((0.0, 0.0), (1.0, 0.0)))
    return _cached(
        (seed, "wedge", trials),
        lambda: _profile_bank(seed, _S_WEDGE, h0, (0.25, 0.45), trials),
    )  # type: ignore[return-value]


def ramp_profiles(seed: int, trials: int = RAMP_TRIALS) -> tuple[Grid, np.ndarray]:
    """Short-horizon profiles started from a sampled linear ramp."""

    def build() -> tuple[Grid, np.ndarray]:
        xg = Grid(_RAMP_X0, _RAMP_DX, _RAMP_POINTS)
        h0 = Sampled(xg, RAMP_SLOPE * xg.times)
        return _profile_bank(seed, _S_RAMP, h0, (-0.05, 1.05), trials, t=RAMP_T)

    return _cached((seed, "ramp", trials), build)  # type: ignore[return-value]


def bm_record_counts(seed: int, trials: int = BM_TRIALS) -> tuple[int, int]:
    """Brownian control: how many rate-2 walks on [0,2] set a record after 1."""

    def build() -> tuple[int, int]:
        base = RngStream(seed, stream_id=_S_BM)
        grid = linspace_grid(0.0, 2.0, 5e-4)
        hits = 0
        for i in range(trials):
            path = sample_bm(grid, rate=2.0, rng=base.substream(i))
            rec = record_times(path, a=0.0)
            # Record times are increasing, so the last one decides.
            if rec.times.size and rec.times[-1] >= 1.0 - 1e-12:
                hits += 1
        return hits, trials

    return _cached((seed, "bm_records", trials), build)  # type: ignore[return-value]


def boundary_ordering_counts(seed: int, trials: int = BOUNDARY_TRIALS) -> tuple[int, int]:
    """How often the first two boundary values are strictly ordered."""

    def build() -> tuple[int, int]:
        base = RngStream(seed, stream_id=_S_BOUNDARY)
        n, dt = 100, 4e-4
        xs = np.linspace(-0.5, 0.5, 21)
        h_vals = -2.0 * xs * xs
        ok = 0
        for i in range(trials):
            env = sample_driving(n, 0.0, 1.0, dt, base.substream(i))
            bd, _ = boundary_data(env, (xs, h_vals), k_max=2, n=n, dt=dt)
            if bd.values[0] > bd.values[1]:
                ok += 1
        return ok, trials

    return _cached((seed, "boundary", trials), build)  # type: ignore[return-value]


def jump_errors(seed: int, trials: int = JUMP_TRIALS) -> np.ndarray:
    """Signed jump times of the top geodesic step toward the origin."""

    def build() -> np.ndarray:
        base = RngStream(seed, stream_id=_S_JUMP)
        n, dt = 100, 4e-4
        anchor = SemiInfiniteAnchor.from_time(-2.0, 2)
        eps = np.empty(trials)
        for i in range(trials):
            env = sample_driving(n, 0.0, 1.0, dt, base.substream(i))
            eps[i] = geodesic_jump_time(env, anchor, (0.0, 1), 1, n=n, dt=dt)
        return eps

    return _cached((seed, "jump", trials), build)  # type: ignore[return-value]


def jump_control(seed: int, trials: int = JUMP_TRIALS) -> np.ndarray:
    """Jump times for a bare two-line environment on [-1/2, 0].

    The jump from line 2 to line 1 maximises the difference walk, so its
    location follows the arcsine law in the continuum limit.
    """

    def build() -> np.ndarray:
        base = RngStream(seed, stream_id=_S_JUMP_CTRL)
        grid = linspace_grid(-0.5, 0.0, 2e-4)
        p = grid.n_points
        anchor = SemiInfiniteAnchor.from_time(-0.5, 2)
        taus = np.empty(trials)
        for i in range(trials):
            lines = _walk_lines(base.substream(i), 2, p, grid.dt, random_starts=False)
            env = LineEnsembleGrid(grid, lines)
            taus[i] = geodesic_jump_time(env, anchor, (0.0, 1), 1)
        return taus

    return _cached((seed, "jump_ctrl", trials), build)  # type: ignore[return-value]


def coalescence_counts(seed: int, trials: int = COUPLED_TRIALS) -> tuple[int, int]:
    """Coupled flat/two-wedge evolutions: how many coalesce above y = 0."""

    def build() -> tuple[int, int]:
        base = RngStream(seed, stream_id=_S_COUPLED)
        datas = [
            Flat(0.0, support=(0.0, 1.0)),
            NarrowWedges(((0.0, 0.0), (1.0, 0.0))),
        ]
        found = 0
        for i in range(trials):
            pa, pb = evolve_coupled(datas, 1.0, base.substream(i), n=100, dt=4e-4, y_window=(0.0, 2.0))
            if coalescence_tau(pa, pb, y=0.0, tol=1e-6) is not None:
                found += 1
        return found, trials

    return _cached((seed, "coupled", trials), build)  # type: ignore[return-value]


def additive_residuals(seed: int, trials: int = ADDITIVE_TRIALS) -> float:
    """Worst coupling residual over sheets built from independent walk sums."""

    def build() -> float:
        base = RngStream(seed, stream_id=_S_ADDITIVE)
        grid = Grid(0.0, 0.25, 5)
        worst = 0.0
        for i in range(trials):
            sub = base.substream(i)
            b = sample_bm(grid, rate=2.0, rng=sub)
            c = sample_bm(grid, rate=2.0, rng=sub)
            sheet_values = b.values[:, None] + c.values[None, :]
            sheet = SheetSample(grid.times.copy(), grid.times.copy(), sheet_values)
            worst = max(worst, abs(delta_m(sheet, (0.0, 0.0), 1.0)))
        return worst

    return _cached((seed, "additive", trials), build)  # type: ignore[return-value]


def semigroup_samples(
    seed: int,
    direct_trials: int = SEMI_DIRECT_TRIALS,
    split_trials: int = SEMI_SPLIT_TRIALS,
) -> tuple[np.ndarray, np.ndarray]:
    """Unit-time edge values sampled directly and by composing two half scales.

    The composed route evaluates two independent sheets across a window of
    intermediate columns and maximises their rescaled sum; both routes are
    normalised identically, so their one-point laws must agree up to finite
    size effects.
    """

    def build() -> tuple[np.ndarray, np.ndarray]:
        n, dt = 200, _SEMI_DT
        n16 = n ** (1.0 / 6.0)
        n23 = n ** (2.0 / 3.0)
        two_rt = 2.0 * math.sqrt(n)

        direct = np.empty(direct_trials)
        base_d = RngStream(seed, stream_id=_S_SEMI_DIRECT)
        for i in range(direct_trials):
            env = sample_driving(n, 0.0, 1.0, dt, base_d.substream(i))
            d = dp_top(env.lines, _delta(env.grid.n_points, 0))
            j1 = int(_real_index_of(env, dt, np.array([1.0]))[0])
            direct[i] = n16 * (d[j1] - two_rt)

        # Intermediate window: |u| <= z_half / s^2 with s = 2^(-1/3), wide
        # enough that the maximiser of the composed objective stays inside.
        s = 2.0 ** (-1.0 / 3.0)
        z_half = 1.5
        u_hi = z_half / (s * s)
        t_hi_1 = airy_time(n, u_hi)
        t_lo_2 = airy_time(n, -u_hi) - 1.0

        composed = np.empty(split_trials)
        base_c = RngStream(seed, stream_id=_S_SEMI_SPLIT)
        for i in range(split_trials):
            sub = base_c.substream(i)

            env1 = sample_driving(n, 0.0, t_hi_1, dt, sub.substream(0))
            d1 = dp_top(env1.lines, _delta(env1.grid.n_points, 0))

            env2 = sample_driving(n, t_lo_2, 1.0, dt, sub.substream(1))
            rev = reversed_environment(env2)
            j_rev_anchor = rev.grid.index_of(-1.0)
            d2r = dp_top(rev.lines, _delta(rev.grid.n_points, j_rev_anchor))

            # Real columns of env1 inside the window; the matching anchor
            # times on env2 are exactly one unit earlier, and commensurate
            # grids make those times bit-identical across both grids.
            step = max(1, round(dt / env1.grid.dt))
            rc = np.arange(0, env1.grid.n_points, step)
            tt = env1.grid.times[rc]
            keep = (tt >= airy_time(n, -u_hi) - 1e-12) & (tt <= t_hi_1 + 1e-12)
            cols1 = rc[keep]
            t_targets = env1.grid.times[cols1]
            t_anchors = t_targets - 1.0
            g2 = env2.grid
            inside = (t_anchors >= g2.times[0] - 1e-12) & (t_anchors <= g2.times[-1] + 1e-12)
            cols1 = cols1[inside]
            t_targets = t_targets[inside]
            t_anchors = t_anchors[inside]
            cols2 = _real_index_of(env2, dt, t_anchors)
            q2 = (rev.grid.n_points - 1) - cols2

            s1 = n16 * (d1[cols1] - two_rt) - (t_targets - 1.0) * n23
            s2 = n16 * (d2r[q2] - two_rt) + t_anchors * n23
            composed[i] = s * float(np.max(s1 + s2))

        return direct, composed

    return _cached((seed, "semigroup", direct_trials, split_trials), build)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Checks


def _check_melon_identity(seed: int, trials: int = 1_000) -> TestReport:
    t0 = time.perf_counter()
    rng = RngStream(seed, stream_id=_S_MELON)
    k, p = 5, 200
    grid = Grid(0.0, 0.005, p)
    worst = 0.0
    for i in range(trials):
        lines = _walk_lines(rng.substream(i), k, p, grid.dt, random_starts=True)
        ens = LineEnsembleGrid(grid, lines)
        top = melon(ens).lines[0]
        best = np.full(p, -np.inf)
        for lev in range(1, k + 1):
            d = dp_top(np.ascontiguousarray(lines[:lev]), _delta(p, 0))
            np.maximum(best, lines[lev - 1, 0] + d, out=best)
        worst = max(worst, float(np.max(np.abs(top - best))))
    rt = time.perf_counter() - t0
    return make_report(
        "melon_identity",
        worst,
        1e-9,
        worst <= 1e-9 and rt < 30.0,
        (trials, k, p),
        (seed, _S_MELON),
        runtime_s=rt,
    )


def _check_metric_composition(seed: int, trials: int = 1_000) -> TestReport:
    t0 = time.perf_counter()
    rng = RngStream(seed, stream_id=_S_COMPOSE)
    k, p = 4, 30
    grid = Grid(0.0, 1.0 / (p - 1), p)
    worst = 0.0
    for i in range(trials):
        lines = _walk_lines(rng.substream(i), k, p, grid.dt, random_starts=True)
        # Direct value and all-level left profiles in one pass each.
        left = dp_all(lines, _delta(p, 0))
        direct = float(left[0, p - 1])
        for mid in range(1, k + 1):
            # Right factors via the reversed environment of the top slice.
            rev = np.ascontiguousarray(-lines[mid - 1 :: -1, ::-1])
            d_rev = dp_top(rev, _delta(p, 0))
            lhs = float(np.max(left[mid - 1] + d_rev[::-1]))
            worst = max(worst, abs(lhs - direct))
    rt = time.perf_counter() - t0
    return make_report(
        "metric_composition",
        worst,
        1e-9,
        worst <= 1e-9 and rt < 60.0,
        (trials, k, p),
        (seed, _S_COMPOSE),
        runtime_s=rt,
    )


def _check_edge_law(seed: int, trials: int = EDGE_TRIALS) -> TestReport:
    _, raw = edge_values(seed, trials)
    n = _EDGE_N
    scaled = n ** (1.0 / 6.0) * (raw[:, 1] - 2.0 * math.sqrt(n))
    ref = n ** (1.0 / 6.0) * (gue_values(seed, trials) - 2.0 * math.sqrt(n))
    d, p = ks_two_sample(scaled, ref)
    return make_report(
        "edge_law",
        d,
        0.05,
        d < 0.05,
        (scaled.size, ref.size),
        (seed, _S_EDGE, _S_GUE),
        p_value=p,
    )


def _check_stationarity(seed: int, trials: int = STATIONARITY_TRIALS) -> TestReport:
    times, raw = edge_values(seed)
    m = min(trials, raw.shape[0])
    n = _EDGE_N
    # Exact finite-size stationarity: dividing out the root-time growth and
    # recentring gives the same one-point law at every read-off coordinate,
    # and this normalisation already includes the parabolic recentering.
    z = n ** (1.0 / 6.0) * (raw[:m] - 2.0 * np.sqrt(n * times)) / np.sqrt(times)
    worst_d, min_p = 0.0, 1.0
    for a in range(z.shape[1]):
        for b in range(a + 1, z.shape[1]):
            d, p = ks_two_sample(z[:, a], z[:, b])
            worst_d = max(worst_d, d)
            min_p = min(min_p, p)
    return make_report(
        "stationarity",
        worst_d,
        0.01,
        min_p > 0.01,
        (m, z.shape[1]),
        (seed, _S_EDGE),
        p_value=min_p,
    )


def _check_quadrangle_inequality(seed: int, trials: int = SHEET_WIDE_TRIALS) -> TestReport:
    base = RngStream(seed, stream_id=_S_SHEETS_WIDE)
    worst = 0.0
    try:
        for i in range(trials):
            sheet = sample_airy_sheet(
                50, (0.0, 1.0), (0.0, 1.0), 1e-3, base.substream(i), n_x=8, n_y=8
            )
            worst = min(worst, sheet.worst_quadrangle_gap())
    except DomainError:
        # Construction itself rejects sheets with a violating rectangle.
        return make_report(
            "quadrangle_inequality", -math.inf, 1e-9, False, (trials, 8, 8), (seed, _S_SHEETS_WIDE)
        )
    return make_report(
        "quadrangle_inequality",
        worst,
        1e-9,
        worst >= -1e-9,
        (trials, 8, 8),
        (seed, _S_SHEETS_WIDE),
    )


def _check_quadrangle_equality(seed: int, trials: int = SHEET_FINE_TRIALS) -> TestReport:
    deltas = sheet_deltas(seed, trials)
    eq = deltas <= 1e-6
    k0 = int(np.count_nonzero(eq[:, 0]))
    lo, hi = wilson_ci(k0, deltas.shape[0])
    props = eq.mean(axis=0)
    monotone = bool(props[0] >= props[1] >= props[2])
    passed = lo > 0.0 and hi < 1.0 and monotone
    return make_report(
        "quadrangle_equality",
        float(props[0]),
        1.0,
        passed,
        (deltas.shape[0],),
        (seed, _S_SHEETS_FINE),
        p_value=lo,
    )


def _check_record_times(seed: int, trials: int = FLAT_TRIALS) -> TestReport:
    grid, rows = flat_profiles(seed, trials)
    times = grid.times
    b = float(times[np.argmin(np.abs(times - 0.5))])
    c = float(times[np.argmin(np.abs(times - 1.0))])
    hits = 0
    for i in range(rows.shape[0]):
        rec = record_times(GridFunction(grid, rows[i]), a=0.0)
        if np.any((rec.times >= b - 1e-12) & (rec.times <= c + 1e-12)):
            hits += 1
    lo, hi = wilson_ci(hits, rows.shape[0])

    ctrl_hits, ctrl_trials = bm_record_counts(seed)
    ctrl_freq = ctrl_hits / ctrl_trials
    ctrl_err = abs(ctrl_freq - 0.5)
    passed = lo > 0.0 and hi < 1.0 and ctrl_err <= 0.02
    return make_report(
        "record_times",
        ctrl_err,
        0.02,
        passed,
        (rows.shape[0], ctrl_trials),
        (seed, _S_FLAT, _S_BM),
        p_value=lo,
    )


def _check_boundary_ordering(seed: int, trials: int = BOUNDARY_TRIALS) -> TestReport:
    ok, total = boundary_ordering_counts(seed, trials)
    freq = ok / total
    lo, _ = wilson_ci(ok, total)
    return make_report(
        "boundary_ordering",
        freq,
        0.99,
        freq >= 0.99,
        (total,),
        (seed, _S_BOUNDARY),
        p_value=lo,
    )


def _check_jump_times(seed: int, trials: int = JUMP_TRIALS) -> TestReport:
    eps = jump_errors(seed, trials)
    frac_near = float(np.mean(np.abs(eps) < 0.01))

    taus = jump_control(seed, trials)
    u = (taus + 0.5) / 0.5
    d, p = ks_one_sample(
        u,
        lambda v: (2.0 / math.pi) * np.arcsin(np.sqrt(np.clip(v, 0.0, 1.0))),
        label="arcsine",
    )
    stat = max(frac_near, d)
    return make_report(
        "jump_times",
        stat,
        0.05,
        frac_near < 0.05 and d < 0.05,
        (eps.size, taus.size),
        (seed, _S_JUMP, _S_JUMP_CTRL),
        p_value=p,
    )


def _check_coalescence(seed: int, trials: int = COUPLED_TRIALS) -> TestReport:
    found, total = coalescence_counts(seed, trials)
    freq = found / total
    lo, _ = wilson_ci(found, total)
    return make_report(
        "coalescence",
        freq,
        0.5,
        lo > 0.5,
        (total,),
        (seed, _S_COUPLED),
        p_value=lo,
    )


def _increment_z(grid: Grid, rows: np.ndarray, y0: float, delta: float) -> np.ndarray:
    dy = grid.dt
    j0 = int(round((y0 - float(grid.times[0])) / dy))
    j1 = j0 + max(1, int(round(delta / dy)))
    d_eff = float(grid.times[j1] - grid.times[j0])
    return (rows[:, j1] - rows[:, j0]) / math.sqrt(2.0 * d_eff)


def _check_local_brownian(seed: int, trials: int = FLAT_TRIALS) -> TestReport:
    grid_f, rows_f = flat_profiles(seed, trials)
    z_flat = _increment_z(grid_f, rows_f, 0.5, 0.01)
    d_flat, _ = ks_one_sample(z_flat, std_normal_cdf, label="flat increments")

    grid_w, rows_w = wedge_profiles(seed, trials)
    z_wedge = _increment_z(grid_w, rows_w, 0.3, 0.01)
    d_wedge, _ = ks_one_sample(z_wedge, std_normal_cdf, label="wedge increments")

    # Support event: the whole profile over [0,1] stays within the band of
    # half-width 1/2 around the frozen ramp y -> RAMP_SLOPE*y + RAMP_LEVEL.
    grid_r, rows_r = ramp_profiles(seed, trials)
    times = grid_r.times
    mask = (times >= -1e-12) & (times <= 1.0 + 1e-12)
    ramp = RAMP_SLOPE * times[mask] + RAMP_LEVEL
    dev = np.max(np.abs(rows_r[:, mask] - ramp[None, :]), axis=1)
    hits = int(np.count_nonzero(dev < 0.5))
    lo, _ = wilson_ci(hits, rows_r.shape[0])

    stat = max(d_flat, d_wedge)
    passed = d_flat < 0.05 and d_wedge < 0.05 and lo > 0.0
    return make_report(
        "local_brownian",
        stat,
        0.05,
        passed,
        (z_flat.size, z_wedge.size, rows_r.shape[0]),
        (seed, _S_FLAT, _S_WEDGE, _S_RAMP),
        p_value=lo,
    )


def _check_additive_sheet(seed: int, trials: int = ADDITIVE_TRIALS) -> TestReport:
    worst = additive_residuals(seed, trials)

    deltas = sheet_deltas(seed)
    sep = deltas[:, 2] > 1e-3
    lo, _ = wilson_ci(int(np.count_nonzero(sep)), deltas.shape[0])
    passed = worst <= 1e-9 and lo > 0.0
    return make_report(
        "additive_sheet",
        worst,
        1e-9,
        passed,
        (trials, deltas.shape[0]),
        (seed, _S_ADDITIVE, _S_SHEETS_FINE),
        p_value=lo,
    )


def _check_capacity_suite(seed: int, mc_trials: int = 2_000) -> TestReport:
    seg_time = CompactSetSpec.box((0.0, 1.0), (0.0, 0.0))
    seg_space = CompactSetSpec.box((0.0, 0.0), (0.0, 1.0))
    target = 8.0 / 3.0
    meas = GridMeasure.uniform(seg_time, m=64)

    # Each sub-check is folded into a ratio that must stay at or below 1.
    ratios: list[float] = []
    ratios.append(abs(thermal_energy(meas) / target - 1.0) / 0.01)
    ratios.append(abs(bessel_riesz_energy(meas) / target - 1.0) / 0.01)

    rep = capacity(seg_time, kernel="riesz", gamma=0.0, m=64, kappa=4.0, rel_tol=1e-4)
    ratios.append(rep.gap / (1e-4 * rep.energy))
    ratios.append(abs(rep.capacity / 0.375 - 1.0) / 0.05)

    ratios.append(abs(parabolic_dim(seg_time) - 2.0) / 0.1)
    ratios.append(abs(parabolic_dim(seg_space) - 1.0) / 0.1)

    rng = RngStream(seed, stream_id=_S_HITTING)
    box_hi = CompactSetSpec.box((1.0, 2.0), (-1.0, 1.0))
    hi_ok = (
        parabolic_dim(box_hi) > 1.2
        and hitting_mc(box_hi, rng.substream(1), n_trials=mc_trials).ci[0] > 0.0
    )
    ratios.append(0.0 if hi_ok else 2.0)

    pt = CompactSetSpec.point(1.0, 0.5)
    lo_ok = (
        parabolic_dim(pt) < 0.8
        and hitting_mc(pt, rng.substream(2), n_trials=mc_trials).ci[0] < 0.01
    )
    ratios.append(0.0 if lo_ok else 2.0)

    stat = max(ratios)
    return make_report(
        "capacity_suite",
        stat,
        1.0,
        stat <= 1.0,
        (64, mc_trials),
        (seed, _S_HITTING),
    )


def _check_semigroup(seed: int) -> TestReport:
    direct, composed = semigroup_samples(seed)
    d, p = ks_two_sample(direct, composed)
    return make_report(
        "semigroup",
        d,
        0.07,
        d < 0.07,
        (direct.size, composed.size),
        (seed, _S_SEMI_DIRECT, _S_SEMI_SPLIT),
        p_value=p,
    )


def build_checks(seed: int) -> dict[str, Callable[[], TestReport]]:
    """Registry of all acceptance checks, keyed by name, seeded once.

    Each entry is a thunk returning a TestReport; banks shared between
    checks are built on first use and reused afterwards.
    """
    return {
        "melon_identity": lambda: _check_melon_identity(seed),
        "metric_composition": lambda: _check_metric_composition(seed),
        "edge_law": lambda: _check_edge_law(seed),
        "stationarity": lambda: _check_stationarity(seed),
        "quadrangle_inequality": lambda: _check_quadrangle_inequality(seed),
        "quadrangle_equality": lambda: _check_quadrangle_equality(seed),
        "record_times": lambda: _check_record_times(seed),
        "boundary_ordering": lambda: _check_boundary_ordering(seed),
        "jump_times": lambda: _check_jump_times(seed),
        "coalescence": lambda: _check_coalescence(seed),
        "local_brownian": lambda: _check_local_brownian(seed),
        "additive_sheet": lambda: _check_additive_sheet(seed),
        "capacity_suite": lambda: _check_capacity_suite(seed),
        "semigroup": lambda: _check_semigroup(seed),
    }


def run_acceptance(seed: int, tags: list[str] | None = None) -> list[TestReport]:
    """Run the full acceptance registry (or a tag-filtered part of it)."""
    return run_suite(build_checks(seed), tags=tags)
