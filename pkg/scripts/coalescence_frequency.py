"""Coalescence detection frequency in the coupled flat/two-wedge setup.

The acceptance suite only asserts that the detection frequency clears a
majority. The frequency itself depends on the agreement tolerance and the
window, which makes it a calibration artifact; this script reports it with
Wilson intervals across a tolerance sweep instead of asserting anything.
Each trial evolves both initial conditions through one shared environment
and scans the same profile pair at every tolerance, so rows are directly
comparable.
"""

from __future__ import annotations

import argparse
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from landscape_lab.io import write_columns_csv
from landscape_lab.kpz import Flat, NarrowWedges, coalescence_tau, evolve_coupled
from landscape_lab.rng import RngStream
from landscape_lab.stats import wilson_ci

STREAM_ID = 21


@dataclass(frozen=True)
class SweepConfig:
    trials: int = 1000
    n: int = 100
    dt: float = 4e-4
    seed: int = 0
    tolerances: tuple[float, ...] = (1e-8, 1e-6, 1e-4)
    out_dir: Path = Path("results")


def run(cfg: SweepConfig) -> dict[str, object]:
    base = RngStream(cfg.seed, stream_id=STREAM_ID)
    datas = [
        Flat(0.0, support=(0.0, 1.0)),
        NarrowWedges(((0.0, 0.0), (1.0, 0.0))),
    ]
    taus = np.full((cfg.trials, len(cfg.tolerances)), np.nan)
    for i in range(cfg.trials):
        pa, pb = evolve_coupled(
            datas, 1.0, base.substream(i), n=cfg.n, dt=cfg.dt, y_window=(0.0, 2.0)
        )
        for j, tol in enumerate(cfg.tolerances):
            tau = coalescence_tau(pa, pb, y=0.0, tol=tol)
            if tau is not None:
                taus[i, j] = tau

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    trial_col = np.repeat(np.arange(cfg.trials, dtype=np.float64), len(cfg.tolerances))
    tol_col = np.tile(np.asarray(cfg.tolerances), cfg.trials)
    write_columns_csv(
        cfg.out_dir / "coalescence_taus.csv",
        ["trial", "tol", "tau"],
        [trial_col, tol_col, taus.ravel()],
    )

    rows = []
    for j, tol in enumerate(cfg.tolerances):
        col = taus[:, j]
        found = int(np.count_nonzero(np.isfinite(col)))
        lo, hi = wilson_ci(found, cfg.trials)
        med = float(np.nanmedian(col)) if found else math.nan
        rows.append(
            {
                "tol": tol,
                "found": found,
                "trials": cfg.trials,
                "freq": found / cfg.trials,
                "ci_lo": lo,
                "ci_hi": hi,
                "median_tau": med,
            }
        )
    summary = {
        "seed": cfg.seed,
        "n": cfg.n,
        "dt": cfg.dt,
        "trials": cfg.trials,
        "rows": rows,
    }
    (cfg.out_dir / "coalescence_frequency.json").write_text(
        json.dumps(summary, indent=2) + "\n"
    )
    return summary


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--dt", type=float, default=4e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tolerances", default="1e-8,1e-6,1e-4")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args(argv)
    cfg = SweepConfig(
        trials=args.trials,
        n=args.n,
        dt=args.dt,
        seed=args.seed,
        tolerances=tuple(float(v) for v in args.tolerances.split(",")),
        out_dir=Path(args.out_dir),
    )
    summary = run(cfg)
    print(f"coupled trials: {cfg.trials}  (n={cfg.n}, dt={cfg.dt}, seed={cfg.seed})")
    print(f"{'tol':>10} {'freq':>8} {'95% CI':>19} {'median tau':>11}")
    for row in summary["rows"]:
        ci = f"[{row['ci_lo']:.4f}, {row['ci_hi']:.4f}]"
        print(f"{row['tol']:>10.1e} {row['freq']:>8.4f} {ci:>19} {row['median_tau']:>11.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
