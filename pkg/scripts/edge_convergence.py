"""Edge law convergence across line counts.

The acceptance criterion pins the melon edge against the matched Gaussian
ensemble at a single size. This sweep repeats the comparison across sizes
and reports how the KS distance behaves as the line count grows, including
sizes far below the asserted one where the discretization bias is visible.
"""

from __future__ import annotations

import argparse
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from landscape_lab.airy import airy_time, sample_driving
from landscape_lab.io import write_columns_csv
from landscape_lab.lpp import melon_top
from landscape_lab.rng import RngStream
from landscape_lab.stats import gue_lmax, ks_two_sample

STREAM_ID = 23


@dataclass(frozen=True)
class SweepConfig:
    line_counts: tuple[int, ...] = (25, 50, 100, 200)
    trials: int = 2000
    dt: float = 1e-4
    seed: int = 0
    out_dir: Path = Path("results")


def edge_samples(n: int, trials: int, dt: float, rng: RngStream) -> np.ndarray:
    """Scaled melon-top values at the y = 0 read-off time."""
    t0 = airy_time(n, 0.0)
    out = np.empty(trials)
    for i in range(trials):
        env = sample_driving(n, 0.0, t0, dt, rng.substream(i))
        j = int(np.argmin(np.abs(env.grid.times - t0)))
        t_j = float(env.grid.times[j])
        top = melon_top(env, 1).lines[0][j]
        out[i] = n ** (1.0 / 6.0) * (top - 2.0 * math.sqrt(n * t_j)) / math.sqrt(t_j)
    return out


def run(cfg: SweepConfig) -> dict[str, object]:
    base = RngStream(cfg.seed, stream_id=STREAM_ID)
    rows: list[dict[str, object]] = []
    for k, n in enumerate(cfg.line_counts):
        scaled = edge_samples(n, cfg.trials, cfg.dt, base.substream(2 * k))
        ref = n ** (1.0 / 6.0) * (
            gue_lmax(n, cfg.trials, base.substream(2 * k + 1)) - 2.0 * math.sqrt(n)
        )
        d, p = ks_two_sample(scaled, ref)
        rows.append(
            {
                "n": n,
                "ks_distance": d,
                "p_value": p,
                "mean": float(np.mean(scaled)),
                "ref_mean": float(np.mean(ref)),
            }
        )

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_columns_csv(
        cfg.out_dir / "edge_convergence.csv",
        ["n", "ks_distance", "p_value", "mean", "ref_mean"],
        [
            np.array([float(r["n"]) for r in rows]),
            np.array([float(r["ks_distance"]) for r in rows]),
            np.array([float(r["p_value"]) for r in rows]),
            np.array([float(r["mean"]) for r in rows]),
            np.array([float(r["ref_mean"]) for r in rows]),
        ],
    )
    summary = {"seed": cfg.seed, "trials": cfg.trials, "dt": cfg.dt, "rows": rows}
    (cfg.out_dir / "edge_convergence.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--line-counts", default="25,50,100,200")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args(argv)
    cfg = SweepConfig(
        line_counts=tuple(int(v) for v in args.line_counts.split(",")),
        trials=args.trials,
        dt=args.dt,
        seed=args.seed,
        out_dir=Path(args.out_dir),
    )
    summary = run(cfg)
    print(f"edge vs matched ensemble, {cfg.trials} trials per size (dt={cfg.dt})")
    print(f"{'n':>5} {'KS dist':>9} {'p':>8} {'mean':>8} {'ref mean':>9}")
    for r in summary["rows"]:
        print(
            f"{r['n']:>5} {r['ks_distance']:>9.4f} {r['p_value']:>8.4f} "
            f"{r['mean']:>8.4f} {r['ref_mean']:>9.4f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
