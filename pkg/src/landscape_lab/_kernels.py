"""JIT inner loops.

Everything here is serial and allocation-light; callers own all array
layout decisions. No fastmath anywhere: the geodesic backtracking relies on
bit-reproducible float comparisons against the forward DP scan.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# Pitman reflection and melon sweeps
# ---------------------------------------------------------------------------


@njit(cache=True)
def pitman_pair_inplace(lines: np.ndarray, i: int) -> None:
    """Reflect the pair (lines[i], lines[i+1]) in place.

    g(t) = max(0, max_{s<=t}(f2 - f1)(s)), taken over grid points from the
    left edge on; the upper output is f1 + g, the lower f2 - g.
    """
    n_pts = lines.shape[1]
    g = 0.0
    for j in range(n_pts):
        d = lines[i + 1, j] - lines[i, j]
        if d > g:
            g = d
        w1 = lines[i, j] + g
        w2 = lines[i + 1, j] - g
        lines[i, j] = w1
        lines[i + 1, j] = w2


@njit(cache=True)
def melon_passes(lines: np.ndarray, n_passes: int) -> None:
    """Run the first n_passes sweeps of the pairwise reflection schedule.

    Pass p sweeps i = n-2 down to p; after pass p, line p+1 (1-based) is
    final. A full melon is n-1 passes.
    """
    n = lines.shape[0]
    for p in range(n_passes):
        for i in range(n - 2, p - 1, -1):
            pitman_pair_inplace(lines, i)


# ---------------------------------------------------------------------------
# Last passage DP
# ---------------------------------------------------------------------------


@njit(cache=True)
def dp_top(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Top-level DP profile for multi-anchor last passage.

    values: (L, P) line values, row 0 the target (top) level, row L-1 the
    anchor (bottom) level. offsets: (P,) anchor offsets, -inf where no
    anchor sits. Returns D (P,) with D[j] = max over anchors j' <= j and
    grid-aligned jump paths of offsets[j'] + path increments ending at
    (j, top). Entries before the first anchor are -inf.
    """
    n_levels, n_pts = values.shape
    d = np.empty(n_pts, dtype=np.float64)
    run = NEG_INF
    bottom = n_levels - 1
    for j in range(n_pts):
        cand = offsets[j] - values[bottom, j]
        if cand > run:
            run = cand
        d[j] = values[bottom, j] + run if run > NEG_INF else NEG_INF
    for lev in range(n_levels - 2, -1, -1):
        run = NEG_INF
        for j in range(n_pts):
            cand = d[j] - values[lev, j]
            if cand > run:
                run = cand
            d[j] = values[lev, j] + run if run > NEG_INF else NEG_INF
    return d


@njit(cache=True)
def dp_all(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Same DP as dp_top but returns all levels, shape (L, P)."""
    n_levels, n_pts = values.shape
    d = np.empty((n_levels, n_pts), dtype=np.float64)
    run = NEG_INF
    bottom = n_levels - 1
    for j in range(n_pts):
        cand = offsets[j] - values[bottom, j]
        if cand > run:
            run = cand
        d[bottom, j] = values[bottom, j] + run if run > NEG_INF else NEG_INF
    for lev in range(n_levels - 2, -1, -1):
        run = NEG_INF
        for j in range(n_pts):
            cand = d[lev + 1, j] - values[lev, j]
            if cand > run:
                run = cand
            d[lev, j] = values[lev, j] + run if run > NEG_INF else NEG_INF
    return d


@njit(cache=True)
def backtrack_rightmost(values: np.ndarray, d: np.ndarray, j_anchor: int, j_target: int) -> np.ndarray:
    """Latest-jump backtracking through a stored DP table.

    jumps[lev] is the column of the jump onto row lev; rows are resolved
    from the target (row 0) downward so each jump is as late as the one
    above it allows. Scanning left to right with >= picks the latest index
    attaining the running max that produced d[lev, cur] and reproduces the
    forward scan's float arithmetic exactly, so equality is exact.
    """
    n_levels = values.shape[0]
    jumps = np.empty(n_levels - 1, dtype=np.int64)
    cur = j_target
    for lev in range(n_levels - 1):
        best = NEG_INF
        best_j = j_anchor
        for j in range(j_anchor, cur + 1):
            cand = d[lev + 1, j] - values[lev, j]
            if cand >= best:
                best = cand
                best_j = j
        jumps[lev] = best_j
        cur = best_j
    return jumps


# ---------------------------------------------------------------------------
# Corner-corrected refinement
# ---------------------------------------------------------------------------


@njit(cache=True)
def corner_refine(values: np.ndarray, dt: float, log_u: np.ndarray) -> np.ndarray:
    """Insert one virtual midpoint per cell carrying exact pair-difference maxima.

    values: (n, P) rate-1 line values on a dt grid. log_u: (n-1, P-1)
    precomputed log of uniforms. Output (n, 2P-1): even columns copy the
    input; odd column 2j+1 holds values[:, j] + c where the cumulative
    corrections c make a level crossing i+1 -> i in cell j gain exactly
    d_i + M with M = (d + sqrt(d^2 - 4 dt log U)) / 2, the running maximum
    of the rate-2 difference bridge across the cell.
    """
    n, p = values.shape
    out = np.empty((n, 2 * p - 1), dtype=np.float64)
    for i in range(n):
        for j in range(p):
            out[i, 2 * j] = values[i, j]
    for j in range(p - 1):
        c = 0.0
        out[n - 1, 2 * j + 1] = values[n - 1, j]
        for i in range(n - 2, -1, -1):
            d = (values[i + 1, j + 1] - values[i + 1, j]) - (values[i, j + 1] - values[i, j])
            m = 0.5 * (d + math.sqrt(d * d - 4.0 * dt * log_u[i, j]))
            c -= m
            out[i, 2 * j + 1] = values[i, j] + c
    return out


# ---------------------------------------------------------------------------
# Brownian bridge chains
# ---------------------------------------------------------------------------


@njit(cache=True)
def bridge_chain(z: np.ndarray, dt: float, total: float, rate: float, a_val: float, b_val: float) -> np.ndarray:
    """Sequentially conditioned Gaussian walk from a_val to b_val.

    z: (P-2,) standard normals for the interior points; the recursion is
    X_{j+1} | X_j, X_end ~ N(X_j + (b - X_j) dt / r_j, rate dt (r_j - dt)/r_j)
    with r_j the time remaining. Endpoints are set exactly.
    """
    n_pts = z.shape[0] + 2
    x = np.empty(n_pts, dtype=np.float64)
    x[0] = a_val
    x[n_pts - 1] = b_val
    for j in range(1, n_pts - 1):
        remaining = total - (j - 1) * dt
        mean = x[j - 1] + (b_val - x[j - 1]) * dt / remaining
        var = rate * dt * (remaining - dt) / remaining
        x[j] = mean + z[j - 1] * math.sqrt(var)
    return x


@njit(cache=True)
def bridge_chain_batch(z: np.ndarray, dt: float, total: float, rate: float, a_vals: np.ndarray, b_vals: np.ndarray) -> np.ndarray:
    """bridge_chain for a batch: z is (R, P-2), returns (R, P)."""
    r = z.shape[0]
    n_pts = z.shape[1] + 2
    out = np.empty((r, n_pts), dtype=np.float64)
    for k in range(r):
        out[k] = bridge_chain(z[k], dt, total, rate, a_vals[k], b_vals[k])
    return out


# ---------------------------------------------------------------------------
# Normal CDF / quantile (for truncated-normal heat bath)
# ---------------------------------------------------------------------------


@njit(cache=True)
def norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


@njit(cache=True)
def norm_ppf(p: float) -> float:
    """Rational approximation to the standard normal quantile (|err| ~ 1e-9)."""
    if p <= 0.0:
        return -38.0
    if p >= 1.0:
        return 38.0
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if p > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


@njit(cache=True)
def truncated_normal_draw(mean: float, sd: float, lo: float, hi: float, u: float) -> float:
    """Inverse-CDF draw from N(mean, sd^2) truncated to (lo, hi).

    Monotone in (mean, lo, hi) for fixed u, which is what makes the shared-
    uniform heat bath a monotone coupling.
    """
    # Keep u away from 0/1 so the draw stays strictly inside (lo, hi).
    u = 1e-12 + u * (1.0 - 2e-12)
    a = norm_cdf((lo - mean) / sd) if lo > NEG_INF else 0.0
    b = norm_cdf((hi - mean) / sd) if hi < np.inf else 1.0
    if b <= a:
        # Degenerate window at float resolution; clamp to its midpoint.
        left = lo if lo > NEG_INF else hi - sd
        right = hi if hi < np.inf else lo + sd
        return 0.5 * (left + right)
    return mean + sd * norm_ppf(a + u * (b - a))


@njit(cache=True)
def heatbath_sweeps(
    lines: np.ndarray,
    row_lo: int,
    row_hi: int,
    col_lo: int,
    col_hi: int,
    floor: np.ndarray,
    has_floor: bool,
    dt: float,
    rate: float,
    u: np.ndarray,
) -> None:
    """Single-site heat-bath passes over rows [row_lo, row_hi] x interior columns.

    Site (r, j) is redrawn from its Brownian-bridge conditional given the
    two time neighbours, truncated strictly between the adjacent rows
    (row above in index = larger value). u supplies one uniform per site
    per sweep, shape (sweeps, rows, cols); sites outside the window are
    untouched, so endpoint columns stay pinned.
    """
    n_sweeps = u.shape[0]
    sd = math.sqrt(rate * dt / 2.0)
    for s in range(n_sweeps):
        for r in range(row_lo, row_hi + 1):
            for j in range(col_lo + 1, col_hi):
                mean = 0.5 * (lines[r, j - 1] + lines[r, j + 1])
                hi = lines[r - 1, j] if r > 0 else np.inf
                if r < lines.shape[0] - 1:
                    lo = lines[r + 1, j]
                elif has_floor:
                    lo = floor[j]
                else:
                    lo = NEG_INF
                lines[r, j] = truncated_normal_draw(mean, sd, lo, hi, u[s, r - row_lo, j - col_lo - 1])
    return
