"""Statistical harness: KS tests, the matrix-edge oracle, confidence intervals.

The harness is deliberately self-contained: ECDF distances and the
asymptotic Kolmogorov tail are computed here, not delegated, so test
thresholds mean the same thing on every platform.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import DomainError
from .rng import RngStream


@dataclass(frozen=True)
class Sample:
    values: np.ndarray = field(repr=False)
    label: str = ""
    seed: int | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size == 0:
            raise DomainError("a sample needs at least one value")
        if not np.all(np.isfinite(v)):
            raise DomainError("sample values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class, despite the name

    name: str
    statistic: float
    p_value: float | None
    threshold: float
    passed: bool
    n: tuple[int, ...]
    seeds: tuple[int | None, ...]
    runtime_s: float

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        p = "" if self.p_value is None else f" p={self.p_value:.4g}"
        return f"[{verdict}] {self.name}: stat={self.statistic:.4g}{p} thr={self.threshold:g} n={self.n}"


def _kolmogorov_sf(lam: float) -> float:
    """Asymptotic Kolmogorov tail Q(lam) = 2 sum (-1)^{k-1} exp(-2 k^2 lam^2)."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return min(max(total, 0.0), 1.0)


def ks_statistic_one_sample(values: np.ndarray, cdf) -> float:
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    f = np.asarray(cdf(x), dtype=np.float64)
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))


def ks_one_sample(values: np.ndarray, cdf, label: str = "one-sample") -> tuple[float, float]:
    """(D, p) against a continuous reference CDF, asymptotic p with small-n polish."""
    d = ks_statistic_one_sample(values, cdf)
    n = np.asarray(values).size
    sqrt_n = math.sqrt(n)
    lam = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d
    return d, _kolmogorov_sf(lam)


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """(D, p) for two independent samples, asymptotic Kolmogorov p."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise DomainError("two-sample KS needs nonempty samples")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = a.size * b.size / (a.size + b.size)
    sqrt_n = math.sqrt(n_eff)
    lam = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d
    return d, _kolmogorov_sf(lam)


def std_normal_cdf(x: np.ndarray) -> np.ndarray:
    from scipy.special import erf as _erf

    return 0.5 * (1.0 + _erf(np.asarray(x) / math.sqrt(2.0)))


def gue_lmax(n: int, n_samples: int, rng: RngStream) -> np.ndarray:
    """Largest eigenvalues of the n-level Gaussian unitary ensemble.

    Sampled through the beta=2 tridiagonal model: diagonal N(0,1), first
    off-diagonal chi_{2(n-k)} / sqrt(2). Exact in law for every n; n=1
    reduces to a standard normal.
    """
    if n < 1:
        raise DomainError(f"matrix size must be >= 1, got {n}")
    out = np.empty(n_samples)
    gen = rng.generator
    if n == 1:
        return gen.standard_normal(n_samples)
    dof = 2.0 * np.arange(n - 1, 0, -1)
    for i in range(n_samples):
        diag = gen.standard_normal(n)
        off = np.sqrt(gen.chisquare(dof) / 2.0)
        ev = eigvalsh_tridiagonal(diag, off, select="i", select_range=(n - 1, n - 1))
        out[i] = ev[0]
    return out


def wilson_ci(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95 percent Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise DomainError("Wilson interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise DomainError(f"successes {successes} outside 0..{trials}")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    # At the boundaries centre and half agree in exact arithmetic; pin them
    # so rounding cannot leave a stray 1e-18 endpoint.
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return (lo, hi)


def run_suite(checks: dict[str, callable], tags: list[str] | None = None) -> list[TestReport]:
    """Run named checks (callables returning TestReport) in sorted name order.

    tags, if given, keep only checks whose name contains one of them.
    Deterministic: each check owns its seeding, and ordering is by name.
    """
    names = sorted(checks)
    if tags is not None:
        names = [m for m in names if any(t in m for t in tags)]
    reports = []
    for name in names:
        t0 = time.perf_counter()
        rep = checks[name]()
        if rep.runtime_s == 0.0:
            rep = replace(rep, runtime_s=time.perf_counter() - t0)
        reports.append(rep)
    return reports


def make_report(
    name: str,
    statistic: float,
    threshold: float,
    passed: bool,
    n: tuple[int, ...],
    seeds: tuple[int | None, ...] = (),
    p_value: float | None = None,
    runtime_s: float = 0.0,
) -> TestReport:
    return TestReport(
        name=name,
        statistic=float(statistic),
        p_value=p_value,
        threshold=float(threshold),
        passed=bool(passed),
        n=tuple(int(v) for v in n),
        seeds=seeds,
        runtime_s=runtime_s,
    )
