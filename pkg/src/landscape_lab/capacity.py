"""Parabolic capacity, box dimensions, and hitting estimates for space-time sets.

Sets live in (time, space) with the parabolic scaling: a box of scale delta
is delta^2 long in time and delta wide in space. Both kernels are
parabolically -1 homogeneous at gamma = 0, so dilating time by r^2 and
space by r multiplies energies by exactly 1/r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError
from .rng import RngStream
from .stats import wilson_ci


# ---------------------------------------------------------------------------
# Set specifications and measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompactSetSpec:
    """A compact space-time set: an axis box (sides may be degenerate),
    a finite point list, or empty."""

    kind: str  # "box" | "points" | "empty"
    time: tuple[float, float] = (0.0, 0.0)
    space: tuple[float, float] = (0.0, 0.0)
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("box", "points", "empty"):
            raise DomainError(f"unknown set kind {self.kind!r}")
        if self.kind == "box":
            if self.time[0] > self.time[1] or self.space[0] > self.space[1]:
                raise DomainError("box intervals must be ordered")
        if self.kind == "points" and len(self.points) == 0:
            raise DomainError("a point set needs at least one point; use kind='empty'")

    @classmethod
    def box(cls, time: tuple[float, float], space: tuple[float, float]) -> "CompactSetSpec":
        return cls(kind="box", time=time, space=space)

    @classmethod
    def point(cls, t: float, x: float) -> "CompactSetSpec":
        return cls(kind="box", time=(t, t), space=(x, x))

    @classmethod
    def empty(cls) -> "CompactSetSpec":
        return cls(kind="empty")


def dilate(spec: CompactSetSpec, time_factor: float, space_factor: float) -> CompactSetSpec:
    """Scale time by time_factor and space by space_factor about the origin."""
    if time_factor <= 0 or space_factor <= 0:
        raise DomainError("dilation factors must be positive")
    if spec.kind == "empty":
        return spec
    if spec.kind == "points":
        pts = tuple((t * time_factor, x * space_factor) for t, x in spec.points)
        return CompactSetSpec(kind="points", points=pts)
    return CompactSetSpec.box(
        (spec.time[0] * time_factor, spec.time[1] * time_factor),
        (spec.space[0] * space_factor, spec.space[1] * space_factor),
    )


@dataclass(frozen=True)
class GridMeasure:
    """A weighted union of axis cells (t_lo, t_hi) x (x_lo, x_hi), weights summing to 1."""

    t_lo: np.ndarray
    t_hi: np.ndarray
    x_lo: np.ndarray
    x_hi: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        arrays = {}
        n = None
        for name in ("t_lo", "t_hi", "x_lo", "x_hi", "weights"):
            a = np.asarray(getattr(self, name), dtype=np.float64).ravel()
            if n is None:
                n = a.size
            if a.size != n or n == 0:
                raise DomainError("cell arrays must be equal-length and nonempty")
            arrays[name] = a
        if np.any(arrays["t_hi"] < arrays["t_lo"]) or np.any(arrays["x_hi"] < arrays["x_lo"]):
            raise DomainError("cells must have ordered corners")
        w = arrays["weights"]
        if np.any(w < 0) or not math.isclose(float(w.sum()), 1.0, rel_tol=0, abs_tol=1e-9):
            raise DomainError("weights must be non-negative and sum to 1")
        for name, a in arrays.items():
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_cells(self) -> int:
        return int(self.weights.size)

    @classmethod
    def uniform(cls, spec: CompactSetSpec, m: int = 64) -> "GridMeasure":
        """Uniform weights on an m-per-axis dissection of the spec's support."""
        if m < 1:
            raise DomainError(f"need at least one slice, got m={m}")
        if spec.kind == "empty":
            raise DomainError("cannot put a measure on the empty set")
        if spec.kind == "points":
            ts = np.array([p[0] for p in spec.points])
            xs = np.array([p[1] for p in spec.points])
            w = np.full(ts.size, 1.0 / ts.size)
            return cls(t_lo=ts, t_hi=ts, x_lo=xs, x_hi=xs, weights=w)
        ta, tb = spec.time
        xa, xb = spec.space
        t_edges = np.linspace(ta, tb, m + 1) if tb > ta else np.array([ta, ta])
        x_edges = np.linspace(xa, xb, m + 1) if xb > xa else np.array([xa, xa])
        cells_t_lo, cells_x_lo = np.meshgrid(t_edges[:-1], x_edges[:-1], indexing="ij")
        cells_t_hi, cells_x_hi = np.meshgrid(t_edges[1:], x_edges[1:], indexing="ij")
        n = cells_t_lo.size
        return cls(
            t_lo=cells_t_lo.ravel(),
            t_hi=cells_t_hi.ravel(),
            x_lo=cells_x_lo.ravel(),
            x_hi=cells_x_hi.ravel(),
            weights=np.full(n, 1.0 / n),
        )

    def rescaled(self, weights: np.ndarray) -> "GridMeasure":
        return GridMeasure(self.t_lo, self.t_hi, self.x_lo, self.x_hi, weights)


# ---------------------------------------------------------------------------
# Kernels and cell-averaged energies
# ---------------------------------------------------------------------------


def _thermal_kernel(dt_abs: float, dx_abs: float, gamma: float) -> float:
    if dt_abs == 0.0:
        return math.inf if dx_abs == 0.0 else 0.0
    val = math.exp(-dx_abs * dx_abs / (4.0 * dt_abs)) / math.sqrt(dt_abs)
    if gamma != 0.0:
        if dx_abs == 0.0:
            return math.inf
        val /= dx_abs**gamma
    return val


def _riesz_kernel(dt_abs: float, dx_abs: float, gamma: float) -> float:
    rho = math.sqrt(dt_abs) + dx_abs
    if rho == 0.0:
        return math.inf
    return rho ** (-(1.0 + gamma))


_KERNELS = {"thermal": _thermal_kernel, "riesz": _riesz_kernel}


def _diff_pdf(w1: float, w2: float):
    """Density of U1 - U2 (centred uniforms of widths w1, w2): trapezoid on
    [-(w1+w2)/2, (w1+w2)/2] with plateau half-width |w1-w2|/2."""
    half = 0.5 * (w1 + w2)
    plateau = 0.5 * abs(w1 - w2)
    height = 1.0 / max(w1, w2)

    def pdf(u: float) -> float:
        a = abs(u)
        if a >= half:
            return 0.0
        if a <= plateau:
            return height
        return height * (half - a) / (half - plateau)

    return pdf, half


def _pair_average(kernel: str, gamma: float, sig: tuple) -> float:
    """Mean kernel value between two cells, integrating against the exact
    difference densities. sig = (wt1, wt2, dt_centres, wx1, wx2, dx_centres)."""
    kf = _KERNELS[kernel]
    wt1, wt2, dtc, wx1, wx2, dxc = sig

    if wx1 == 0.0 and wx2 == 0.0:
        if wt1 == 0.0 and wt2 == 0.0:
            return kf(abs(dtc), abs(dxc), gamma)
        pdf_t, half_t = _diff_pdf(wt1, wt2)
        if kernel == "riesz" and gamma >= 1.0 and dxc == 0.0 and pdf_t(dtc) > 0.0:
            # |dt|^-(1+gamma)/2 stops being integrable at gamma = 1 whenever
            # the lag density puts mass on zero; quad would return garbage.
            return math.inf
        lo, hi = dtc - half_t, dtc + half_t
        pts = [p for p in (0.0,) if lo < p < hi]
        val, _ = integrate.quad(
            lambda u: kf(abs(u), abs(dxc), gamma) * pdf_t(u - dtc),
            lo, hi, points=pts or None, limit=200,
        )
        return val

    if wt1 == 0.0 and wt2 == 0.0:
        pdf_x, half_x = _diff_pdf(wx1, wx2)
        if kernel == "riesz" and dtc == 0.0 and pdf_x(dxc) > 0.0:
            # At zero time lag the kernel is |dx|^-(1+gamma), which no
            # admissible gamma makes integrable across overlapping cells.
            return math.inf
        lo, hi = dxc - half_x, dxc + half_x
        pts = [p for p in (0.0,) if lo < p < hi]
        val, _ = integrate.quad(
            lambda v: kf(abs(dtc), abs(v), gamma) * pdf_x(v - dxc),
            lo, hi, points=pts or None, limit=200,
        )
        return val

    pdf_t, half_t = _diff_pdf(wt1, wt2)
    pdf_x, half_x = _diff_pdf(wx1, wx2)
    t_lo, t_hi = dtc - half_t, dtc + half_t
    x_lo, x_hi = dxc - half_x, dxc + half_x

    def inner(v: float) -> float:
        pts = [p for p in (0.0,) if t_lo < p < t_hi]
        val, _ = integrate.quad(
            lambda u: kf(abs(u), abs(v), gamma) * pdf_t(u - dtc),
            t_lo, t_hi, points=pts or None, limit=200,
        )
        return val * pdf_x(v - dxc)

    x_pts = [p for p in (0.0,) if x_lo < p < x_hi]
    val, _ = integrate.quad(inner, x_lo, x_hi, points=x_pts or None, limit=200)
    return val


def kernel_matrix(measure: GridMeasure, kernel: str = "riesz", gamma: float = 0.0) -> np.ndarray:
    """Cell-pair averaged kernel matrix; entries may be +inf for atom self-pairs."""
    if kernel not in _KERNELS:
        raise DomainError(f"unknown kernel {kernel!r}")
    n = measure.n_cells
    wt = measure.t_hi - measure.t_lo
    wx = measure.x_hi - measure.x_lo
    ct = 0.5 * (measure.t_hi + measure.t_lo)
    cx = 0.5 * (measure.x_hi + measure.x_lo)
    cache: dict[tuple, float] = {}
    k = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            sig = (
                round(wt[i], 14), round(wt[j], 14), round(abs(ct[i] - ct[j]), 14),
                round(wx[i], 14), round(wx[j], 14), round(abs(cx[i] - cx[j]), 14),
            )
            if sig not in cache:
                cache[sig] = _pair_average(kernel, gamma, sig)
            k[i, j] = k[j, i] = cache[sig]
    return k


def _energy(measure: GridMeasure, kernel: str, gamma: float) -> float:
    k = kernel_matrix(measure, kernel, gamma)
    w = measure.weights
    active = w > 0
    if not np.all(np.isfinite(k[np.ix_(active, active)])):
        return math.inf
    return float(w @ k @ w)


def thermal_energy(measure: GridMeasure, gamma: float = 0.0) -> float:
    """Heat-kernel gamma-energy of the measure; +inf when it carries atoms."""
    if gamma < 0.0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")
    return _energy(measure, "thermal", gamma)


def bessel_riesz_energy(measure: GridMeasure, gamma: float = 0.0) -> float:
    """Parabolic-metric Riesz energy: kernel (sqrt|t-s| + |x-y|)^(-(1+gamma))."""
    return _energy(measure, "riesz", gamma)


# ---------------------------------------------------------------------------
# Capacity: energy minimization over the capped simplex
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapacityReport:
    capacity: float
    energy: float
    gap: float
    iterations: int
    method: str
    weights: np.ndarray = field(repr=False)


def _lmo_capped(grad: np.ndarray, cap: float) -> np.ndarray:
    """Minimize grad . s over {0 <= s <= cap, sum s = 1}: fill smallest entries first."""
    s = np.zeros_like(grad)
    remaining = 1.0
    for i in np.argsort(grad, kind="stable"):
        take = min(cap, remaining)
        s[i] = take
        remaining -= take
        if remaining <= 0:
            break
    return s


def _project_capped_simplex(v: np.ndarray, cap: float) -> np.ndarray:
    """Euclidean projection onto {0 <= w <= cap, sum w = 1} by water-level bisection."""
    lo = float(np.min(v)) - cap - 1.0
    hi = float(np.max(v)) + 1.0
    for _ in range(100):
        lam = 0.5 * (lo + hi)
        total = np.clip(v - lam, 0.0, cap).sum()
        if total > 1.0:
            lo = lam
        else:
            hi = lam
    return np.clip(v - 0.5 * (lo + hi), 0.0, cap)


def _capacity_common(spec: CompactSetSpec, kernel: str, gamma: float, m: int, kappa: float):
    if spec.kind == "empty":
        raise DomainError("the empty set has no capacity problem; its capacity is 0 by convention")
    measure = GridMeasure.uniform(spec, m)
    k = kernel_matrix(measure, kernel, gamma)
    n = measure.n_cells
    cap = kappa / n
    if cap * n < 1.0 - 1e-12:
        raise DomainError(f"cap kappa/n = {cap} cannot carry total mass 1")
    if not np.all(np.isfinite(np.diag(k))):
        # Atoms: every feasible measure has infinite energy.
        return measure, k, cap, True
    return measure, k, cap, False


def capacity(
    spec: CompactSetSpec,
    kernel: str = "riesz",
    gamma: float = 0.0,
    m: int = 64,
    kappa: float = 4.0,
    rel_tol: float = 1e-4,
    max_iter: int = 20_000,
) -> CapacityReport:
    """1 / (minimal gamma-energy) over near-uniform measures on the set.

    Minimization runs over cell weights in the capped simplex
    {0 <= w_i <= kappa/n, sum w = 1} by pairwise Frank-Wolfe steps with exact
    line search, stopping at duality gap below rel_tol * energy.
    """
    measure, k, cap, atomic = _capacity_common(spec, kernel, gamma, m, kappa)
    n = measure.n_cells
    if atomic:
        return CapacityReport(0.0, math.inf, 0.0, 0, "fw", np.full(n, 1.0 / n))
    w = np.full(n, 1.0 / n)
    kw = k @ w
    iters = 0
    gap = math.inf
    for iters in range(1, max_iter + 1):
        grad = 2.0 * kw
        s = _lmo_capped(grad, cap)
        energy = float(w @ kw)
        gap = float(grad @ (w - s))
        if gap <= rel_tol * energy:
            break
        # Pairwise step: shift mass from the worst active cell to the best open one.
        active = np.flatnonzero(w > 1e-15)
        open_ = np.flatnonzero(w < cap - 1e-15)
        i = active[np.argmax(grad[active])]
        j = open_[np.argmin(grad[open_])]
        if i != j:
            q = k[i, i] + k[j, j] - 2.0 * k[i, j]
            g_max = min(float(w[i]), float(cap - w[j]))
            g_star = g_max if q <= 0 else min(g_max, (grad[i] - grad[j]) / (2.0 * q))
            if g_star > 0:
                w[i] -= g_star
                w[j] += g_star
                kw = kw + g_star * (k[:, j] - k[:, i])
                continue
        # Fallback: classic step toward the LMO vertex.
        d = s - w
        q = float(d @ (k @ d))
        g_star = 1.0 if q <= 0 else min(1.0, gap / (2.0 * q))
        if g_star <= 0:
            break
        w = w + g_star * d
        kw = k @ w
    energy = float(w @ (k @ w))
    # A kernel that vanishes on the whole set (thermal on a fixed-time slice)
    # gives zero energy: the capacity is infinite, not a division error.
    cap_val = math.inf if energy == 0.0 else 1.0 / energy
    return CapacityReport(cap_val, energy, gap, iters, "fw", w)


def projected_gradient_capacity(
    spec: CompactSetSpec,
    kernel: str = "riesz",
    gamma: float = 0.0,
    m: int = 64,
    kappa: float = 4.0,
    n_iter: int = 5_000,
) -> CapacityReport:
    """Independent minimizer for cross-checking capacity(): projected gradient
    descent with a fixed step from the kernel matrix spectral norm."""
    measure, k, cap, atomic = _capacity_common(spec, kernel, gamma, m, kappa)
    n = measure.n_cells
    if atomic:
        return CapacityReport(0.0, math.inf, 0.0, 0, "pg", np.full(n, 1.0 / n))
    w = np.full(n, 1.0 / n)
    lam_max = float(np.linalg.eigvalsh(k)[-1])
    if lam_max <= 0.0:
        return CapacityReport(math.inf, 0.0, 0.0, 0, "pg", w)
    eta = 1.0 / (2.0 * lam_max)
    for _ in range(n_iter):
        w = _project_capped_simplex(w - eta * 2.0 * (k @ w), cap)
    kw = k @ w
    energy = float(w @ kw)
    grad = 2.0 * kw
    gap = float(grad @ (w - _lmo_capped(grad, cap)))
    cap_val = math.inf if energy == 0.0 else 1.0 / energy
    return CapacityReport(cap_val, energy, gap, n_iter, "pg", w)


# ---------------------------------------------------------------------------
# Parabolic box dimension
# ---------------------------------------------------------------------------


def parabolic_dim(spec: CompactSetSpec, j_min: int = 3, j_max: int = 8) -> float:
    """Box-counting slope under parabolic boxes: delta^2 in time, delta in space.

    Counts are analytic for box and point specs, so the estimate is a pure
    least-squares slope of log2 N against j for delta = 2^-j.
    """
    if j_max <= j_min:
        raise DomainError("need j_max > j_min")
    if spec.kind == "empty":
        return 0.0
    js = np.arange(j_min, j_max + 1, dtype=np.float64)
    counts = np.empty(js.size)
    for idx, j in enumerate(js):
        delta = 2.0 ** (-j)
        counts[idx] = _box_count(spec, delta)
    logs = np.log2(counts)
    jc = js - js.mean()
    denom = float(jc @ jc)
    return float(jc @ (logs - logs.mean()) / denom)


def _interval_boxes(lo: float, hi: float, size: float) -> int:
    return int(math.floor(hi / size) - math.floor(lo / size)) + 1


def _box_count(spec: CompactSetSpec, delta: float) -> int:
    if spec.kind == "box":
        nt = _interval_boxes(spec.time[0], spec.time[1], delta * delta)
        nx = _interval_boxes(spec.space[0], spec.space[1], delta)
        return nt * nx
    seen = {
        (math.floor(t / (delta * delta)), math.floor(x / delta)) for t, x in spec.points
    }
    return len(seen)


# ---------------------------------------------------------------------------
# Hitting probability by simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HittingReport:
    p_hat: float
    ci: tuple[float, float]
    hits: int
    n_trials: int


def hitting_mc(
    spec: CompactSetSpec,
    rng: RngStream,
    n_trials: int = 10_000,
    dt: float = 1e-4,
) -> HittingReport:
    """P((t, B_t) enters the set) for a standard Brownian motion from 0.

    Level sets (degenerate space side) use exact bridge-crossing
    probabilities per step, so the only discretization left is in the time
    window ends. Point specs have hitting probability zero and are reported
    as such without simulation.
    """
    if n_trials < 1:
        raise DomainError("need at least one trial")
    if spec.kind == "empty" or spec.kind == "points":
        return HittingReport(0.0, wilson_ci(0, n_trials), 0, n_trials)
    ta, tb = spec.time
    xa, xb = spec.space
    if tb <= 0:
        return HittingReport(0.0, wilson_ci(0, n_trials), 0, n_trials)
    ta = max(ta, 0.0)
    steps = max(1, int(round(tb / dt)))
    ja = min(steps, int(round(ta / dt)))
    hits = 0
    chunk = max(1, int(4_000_000 / (steps + 1)))
    done = 0
    while done < n_trials:
        c = min(chunk, n_trials - done)
        z = rng.normals((c, steps))
        x = np.empty((c, steps + 1))
        x[:, 0] = 0.0
        np.cumsum(z * math.sqrt(dt), axis=1, out=x[:, 1:])
        window = x[:, ja : steps + 1]
        if xb > xa:
            hit = np.any((window >= xa) & (window <= xb), axis=1)
            if ta == 0.0 and xa <= 0.0 <= xb:
                hit |= True
        else:
            level = xa
            seg_a = window[:, :-1] - level
            seg_b = window[:, 1:] - level
            crossed = (seg_a * seg_b <= 0.0).any(axis=1)
            # Same-side steps can still dip across: exact bridge probability.
            u = rng.uniforms(seg_a.shape)
            p_bridge = np.exp(-2.0 * np.maximum(seg_a * seg_b, 0.0) / dt)
            dipped = (u < p_bridge) & (seg_a * seg_b > 0.0)
            hit = crossed | dipped.any(axis=1)
        hits += int(np.count_nonzero(hit))
        done += c
    p = hits / n_trials
    return HittingReport(p, wilson_ci(hits, n_trials), hits, n_trials)


# ---------------------------------------------------------------------------
# Image geometry of a value set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ImageReport:
    box_dim: float
    covering_length: float
    n_distinct: int


def image_geometry(values: np.ndarray) -> ImageReport:
    """Box dimension and covering length of a 1-D value set.

    The dimension is the slope of dyadic interval counts over octaves coarse
    enough to be resolved by the sample (2^j <= n/10); with no such octave
    the set is treated as scaling-free, dimension 0. The covering length is
    N(delta) * delta at the finest resolved octave.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise DomainError("image geometry needs at least one value")
    if not np.all(np.isfinite(v)):
        raise DomainError("values must be finite")
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        return ImageReport(0.0, 0.0, 1)
    span = hi - lo
    j_hi = int(math.floor(math.log2(v.size / 10.0))) if v.size >= 40 else 0
    n_distinct = int(np.unique(v).size)

    def count(j: int) -> int:
        delta = span * 2.0 ** (-j)
        return int(np.unique(np.floor((v - lo) / delta)).size)

    if j_hi < 2:
        box_dim = 0.0
    else:
        js = np.arange(1, j_hi + 1, dtype=np.float64)
        logs = np.log2([count(int(j)) for j in js])
        jc = js - js.mean()
        box_dim = float(jc @ (logs - logs.mean()) / (jc @ jc))
    j_ref = max(1, min(10, int(math.floor(math.log2(v.size / 4.0)))))
    delta_ref = span * 2.0 ** (-j_ref)
    covering_length = count(j_ref) * delta_ref
    return ImageReport(box_dim, float(covering_length), n_distinct)
