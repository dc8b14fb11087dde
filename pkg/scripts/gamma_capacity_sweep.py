"""Exploratory gamma sweep of parabolic capacities on canonical sets.

Only gamma = 0 carries an acceptance target. For gamma > 0 the interesting
quantity is the largest gamma at which a set still has positive capacity,
which is what the dimension bounds trade in; the optimizer floor and the
grid resolution both bias that threshold, so everything here is reported,
never asserted. Brownian hitting frequencies with Wilson intervals are
included for the time-shifted copies of each set as an independent
plausibility column.
"""

from __future__ import annotations

import argparse
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from landscape_lab.capacity import CompactSetSpec, capacity, hitting_mc, parabolic_dim
from landscape_lab.io import write_columns_csv
from landscape_lab.rng import RngStream

STREAM_ID = 22

# Canonical sets: a pure time segment, a pure space segment, the unit box.
SETS: dict[str, CompactSetSpec] = {
    "time_segment": CompactSetSpec.box((0.0, 1.0), (0.0, 0.0)),
    "space_segment": CompactSetSpec.box((0.0, 0.0), (0.0, 1.0)),
    "unit_box": CompactSetSpec.box((0.0, 1.0), (0.0, 1.0)),
}

# Same sets pushed one time unit out so the walk has diffused before the
# first chance to hit; hitting from the origin at t = 0 would be trivial.
HIT_SETS: dict[str, CompactSetSpec] = {
    "time_segment": CompactSetSpec.box((1.0, 2.0), (0.0, 0.0)),
    "space_segment": CompactSetSpec.box((1.0, 1.0), (0.0, 1.0)),
    "unit_box": CompactSetSpec.box((1.0, 2.0), (0.0, 1.0)),
}


@dataclass(frozen=True)
class SweepConfig:
    gammas: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    kernels: tuple[str, ...] = ("riesz", "thermal")
    m_segment: int = 48
    m_box: int = 10
    positive_floor: float = 1e-6
    hit_trials: int = 2000
    hit_dt: float = 1e-3
    seed: int = 0
    out_dir: Path = Path("results")


def _jsonable(obj):
    """Strict JSON has no token for infinities; ship their repr instead."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _m_for(spec: CompactSetSpec, cfg: SweepConfig) -> int:
    two_dimensional = spec.time[1] > spec.time[0] and spec.space[1] > spec.space[0]
    return cfg.m_box if two_dimensional else cfg.m_segment


def run(cfg: SweepConfig) -> dict[str, object]:
    rows: list[dict[str, object]] = []
    for name, spec in SETS.items():
        m = _m_for(spec, cfg)
        for kernel in cfg.kernels:
            for gamma in cfg.gammas:
                rep = capacity(spec, kernel=kernel, gamma=gamma, m=m)
                rows.append(
                    {
                        "set": name,
                        "kernel": kernel,
                        "gamma": gamma,
                        "m": m,
                        "capacity": rep.capacity,
                        "energy": rep.energy,
                        "gap": rep.gap,
                        "iterations": rep.iterations,
                    }
                )

    stars: list[dict[str, object]] = []
    rng = RngStream(cfg.seed, stream_id=STREAM_ID)
    for k, (name, spec) in enumerate(SETS.items()):
        hit = hitting_mc(
            HIT_SETS[name], rng.substream(k), n_trials=cfg.hit_trials, dt=cfg.hit_dt
        )
        for kernel in cfg.kernels:
            positive = [
                float(r["gamma"])
                for r in rows
                if r["set"] == name
                and r["kernel"] == kernel
                and float(r["capacity"]) > cfg.positive_floor
            ]
            stars.append(
                {
                    "set": name,
                    "kernel": kernel,
                    "gamma_star": max(positive) if positive else None,
                    "parabolic_dim": parabolic_dim(spec),
                    "hit_freq": hit.p_hat,
                    "hit_ci": list(hit.ci),
                }
            )

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    kernel_code = {"riesz": 0.0, "thermal": 1.0}
    write_columns_csv(
        cfg.out_dir / "gamma_capacities.csv",
        ["kernel_is_thermal", "gamma", "set_index", "capacity", "energy", "gap"],
        [
            np.array([kernel_code[str(r["kernel"])] for r in rows]),
            np.array([float(r["gamma"]) for r in rows]),
            np.array([float(list(SETS).index(str(r["set"]))) for r in rows]),
            np.array([float(r["capacity"]) for r in rows]),
            np.array([float(r["energy"]) for r in rows]),
            np.array([float(r["gap"]) for r in rows]),
        ],
    )
    summary = {"seed": cfg.seed, "rows": rows, "thresholds": stars}
    (cfg.out_dir / "gamma_capacity_sweep.json").write_text(
        json.dumps(_jsonable(summary), indent=2) + "\n"
    )
    return summary


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gammas", default="0,0.25,0.5,0.75,1")
    ap.add_argument("--m-segment", type=int, default=48)
    ap.add_argument("--m-box", type=int, default=10)
    ap.add_argument("--hit-trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args(argv)
    cfg = SweepConfig(
        gammas=tuple(float(v) for v in args.gammas.split(",")),
        m_segment=args.m_segment,
        m_box=args.m_box,
        hit_trials=args.hit_trials,
        seed=args.seed,
        out_dir=Path(args.out_dir),
    )
    summary = run(cfg)
    print(f"{'set':>14} {'kernel':>8} {'gamma':>6} {'capacity':>10} {'gap/energy':>11}")
    for r in summary["rows"]:
        rel = r["gap"] / r["energy"] if r["energy"] not in (0.0, float("inf")) else 0.0
        print(
            f"{r['set']:>14} {r['kernel']:>8} {r['gamma']:>6.2f} "
            f"{r['capacity']:>10.5f} {rel:>11.2e}"
        )
    print()
    print(f"{'set':>14} {'kernel':>8} {'gamma*':>7} {'dim':>5} {'hit freq (CI)':>24}")
    for s in summary["thresholds"]:
        star = "none" if s["gamma_star"] is None else f"{s['gamma_star']:.2f}"
        ci = f"{s['hit_freq']:.3f} [{s['hit_ci'][0]:.3f}, {s['hit_ci'][1]:.3f}]"
        print(f"{s['set']:>14} {s['kernel']:>8} {star:>7} {s['parabolic_dim']:>5.2f} {ci:>24}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
