"""Command line front end: seeded simulation runs, checks, artifact export.

Every run writes its primary output plus a manifest JSON next to it.  Outputs
are bit-reproducible from (argv, seed); manifests additionally carry wall
clock timestamps, which are documentation only and never feed back into any
computation.  The environment variable ``LANDSCAPE_LAB_SEED`` supplies the
seed when ``--seed`` is absent.

Exit codes: 0 success, 1 domain error, 2 usage error, 3 failing checks in
the ``test`` subcommands.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .acceptance import build_checks, run_acceptance
from .airy import sample_airy_ensemble, sample_airy_sheet
from .capacity import (
    CompactSetSpec,
    GridMeasure,
    bessel_riesz_energy,
    capacity,
    hitting_mc,
    image_geometry,
    parabolic_dim,
    thermal_energy,
)
from .errors import DomainError, LabError
from .grids import linspace_grid
from .io import (
    RunManifest,
    _atomic_write_json,
    load_initial_json,
    read_profile_csv,
    write_ensemble_csv,
    write_manifest,
    write_profile_csv,
    write_sheet_csv,
)
from .kpz import coalescence_tau, delta_m, evolve, evolve_coupled, record_times
from .lpp import LineEnsembleGrid, melon_top
from .rng import RngStream

# Stream ids for CLI-level sampling, disjoint from the acceptance banks.
_S_CLI_MELON = 11
_S_CLI_ENSEMBLE = 12
_S_CLI_SHEET = 13
_S_CLI_EVOLVE = 14
_S_CLI_HITTING = 15


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _resolve_seed(args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("LANDSCAPE_LAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise DomainError(f"LANDSCAPE_LAB_SEED must be an integer, got {env!r}")
    return 0


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise DomainError(f"window must be 'lo,hi', got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not (lo < hi):
        raise DomainError(f"window needs lo < hi, got {text!r}")
    return lo, hi


def _parse_point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise DomainError(f"point must be 'x,y', got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_set(text: str) -> CompactSetSpec:
    """Set specs: 'box:t0,t1,x0,x1' | 'point:t,x' | 'empty'."""
    if text == "empty":
        return CompactSetSpec.empty()
    kind, _, body = text.partition(":")
    vals = [float(v) for v in body.split(",")] if body else []
    if kind == "box" and len(vals) == 4:
        return CompactSetSpec.box((vals[0], vals[1]), (vals[2], vals[3]))
    if kind == "point" and len(vals) == 2:
        return CompactSetSpec.point(vals[0], vals[1])
    raise DomainError(f"bad set spec {text!r}; use box:t0,t1,x0,x1 | point:t,x | empty")


def _manifest_path(out: str | Path) -> Path:
    return Path(out).with_suffix(".manifest.json")


def _write_run_manifest(command: str, seed: int, params: dict[str, Any], outputs: list[str], started: str) -> None:
    manifest = RunManifest(
        command=command,
        seed=seed,
        params=params,
        outputs=tuple(outputs),
        version=__version__,
        started=started,
        finished=_utc_now(),
    )
    write_manifest(_manifest_path(outputs[0]), manifest)


def _json_out(path: str, payload: dict[str, Any]) -> None:
    _atomic_write_json(path, payload)


def _sanitize(x: float | None) -> float | str | None:
    if x is None:
        return None
    return float(x) if math.isfinite(x) else repr(float(x))


# ---------------------------------------------------------------------------
# sim


def _cmd_sim_melon(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    rng = RngStream(seed, stream_id=_S_CLI_MELON)
    grid = linspace_grid(0.0, args.t, args.dt)
    inc = rng.normals((args.n, grid.n_points - 1)) * math.sqrt(grid.dt)
    lines = np.zeros((args.n, grid.n_points))
    np.cumsum(inc, axis=1, out=lines[:, 1:])
    k = args.lines if args.lines is not None else args.n
    mel = melon_top(LineEnsembleGrid(grid, lines), k)
    write_ensemble_csv(args.out, grid.times, mel.lines)
    _write_run_manifest(
        "sim melon", seed,
        {"n": args.n, "t": args.t, "dt": args.dt, "lines": k},
        [args.out], started,
    )
    return 0


def _cmd_sim_airy_ensemble(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    rng = RngStream(seed, stream_id=_S_CLI_ENSEMBLE)
    approx = sample_airy_ensemble(
        args.n, args.y_max, args.dt, rng, lines=args.lines, normalization=args.normalization
    )
    write_ensemble_csv(args.out, approx.y_grid.times, approx.ensemble.lines)
    _write_run_manifest(
        "sim airy-ensemble", seed,
        {
            "n": args.n, "y_max": args.y_max, "dt": args.dt,
            "lines": args.lines, "normalization": args.normalization,
        },
        [args.out], started,
    )
    return 0


def _cmd_sim_airy_sheet(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    rng = RngStream(seed, stream_id=_S_CLI_SHEET)
    x_win = _parse_window(args.x_window)
    y_win = _parse_window(args.y_window)
    sheet = sample_airy_sheet(
        args.n, x_win, y_win, args.dt, rng, n_x=args.x_points, n_y=args.y_points
    )
    write_sheet_csv(args.out, sheet.x_grid, sheet.y_grid, sheet.values)
    _write_run_manifest(
        "sim airy-sheet", seed,
        {
            "n": args.n, "dt": args.dt, "x_window": list(x_win), "y_window": list(y_win),
            "x_points": args.x_points, "y_points": args.y_points,
        },
        [args.out], started,
    )
    return 0


# ---------------------------------------------------------------------------
# kpz


def _evolved_profile(args: argparse.Namespace, seed: int):
    h0 = load_initial_json(args.init)
    rng = RngStream(seed, stream_id=_S_CLI_EVOLVE)
    y_win = _parse_window(args.y_window)
    return evolve(h0, args.t, rng, n=args.n, dt=args.dt, y_window=y_win)


def _cmd_kpz_evolve(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    prof = _evolved_profile(args, seed)
    write_profile_csv(args.out, prof)
    _write_run_manifest(
        "kpz evolve", seed,
        {"init": args.init, "t": args.t, "n": args.n, "dt": args.dt, "y_window": args.y_window},
        [args.out], started,
    )
    return 0


def _cmd_kpz_records(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    prof = _evolved_profile(args, seed)
    a = args.a if args.a is not None else float(prof.grid.times[0])
    rec = record_times(prof, a=a, tol=args.tol)
    payload: dict[str, Any] = {
        "a": rec.a,
        "n_records": int(rec.times.size),
        "record_times": [float(v) for v in rec.times],
    }
    if args.window is not None:
        b, c = _parse_window(args.window)
        inside = (rec.times >= b - 1e-12) & (rec.times <= c + 1e-12)
        payload["window"] = [b, c]
        payload["hit_in_window"] = bool(np.any(inside))
    _json_out(args.out, payload)
    _write_run_manifest(
        "kpz records", seed,
        {
            "init": args.init, "t": args.t, "n": args.n, "dt": args.dt,
            "y_window": args.y_window, "a": args.a, "tol": args.tol, "window": args.window,
        },
        [args.out], started,
    )
    return 0


def _cmd_kpz_coalesce(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    datas = [load_initial_json(args.init_a), load_initial_json(args.init_b)]
    rng = RngStream(seed, stream_id=_S_CLI_EVOLVE)
    y_win = _parse_window(args.y_window)
    pa, pb = evolve_coupled(datas, args.t, rng, n=args.n, dt=args.dt, y_window=y_win)
    tau = coalescence_tau(pa, pb, y=args.y, tol=args.tol)
    payload = {
        "coalesced": tau is not None,
        "tau": tau,
        "y": args.y,
        "tol": args.tol,
    }
    _json_out(args.out, payload)
    outputs = [args.out]
    if args.profiles_out is not None:
        write_ensemble_csv(
            args.profiles_out, pa.grid.times, np.vstack([pa.values, pb.values])
        )
        outputs.append(args.profiles_out)
    _write_run_manifest(
        "kpz coalesce", seed,
        {
            "init_a": args.init_a, "init_b": args.init_b, "t": args.t, "n": args.n,
            "dt": args.dt, "y_window": args.y_window, "y": args.y, "tol": args.tol,
        },
        outputs, started,
    )
    return 0


def _cmd_kpz_quadrangle(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    rng = RngStream(seed, stream_id=_S_CLI_SHEET)
    x_win = _parse_window(args.x_window)
    y_win = _parse_window(args.y_window)
    sheet = sample_airy_sheet(
        args.n, x_win, y_win, args.dt, rng, n_x=args.x_points, n_y=args.y_points
    )
    base = _parse_point(args.base)
    sizes = [float(v) for v in args.sizes.split(",")] if args.sizes else [0.25, 0.5, 1.0]
    deltas = {f"{m:g}": _sanitize(delta_m(sheet, base, m)) for m in sizes}
    payload = {
        "base": list(base),
        "min_gap": _sanitize(sheet.worst_quadrangle_gap()),
        "delta": deltas,
    }
    _json_out(args.out, payload)
    outputs = [args.out]
    if args.sheet_out is not None:
        write_sheet_csv(args.sheet_out, sheet.x_grid, sheet.y_grid, sheet.values)
        outputs.append(args.sheet_out)
    _write_run_manifest(
        "kpz quadrangle", seed,
        {
            "n": args.n, "dt": args.dt, "x_window": args.x_window, "y_window": args.y_window,
            "x_points": args.x_points, "y_points": args.y_points,
            "base": args.base, "sizes": args.sizes,
        },
        outputs, started,
    )
    return 0


# ---------------------------------------------------------------------------
# cap


def _cmd_cap_energy(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    spec = _parse_set(args.set)
    meas = GridMeasure.uniform(spec, m=args.m)
    fn = thermal_energy if args.kernel == "thermal" else bessel_riesz_energy
    energy = fn(meas, gamma=args.gamma)
    payload = {
        "set": args.set, "kernel": args.kernel, "gamma": args.gamma, "m": args.m,
        "energy": _sanitize(energy),
    }
    _json_out(args.out, payload)
    _write_run_manifest("cap energy", seed, payload, [args.out], started)
    return 0


def _cmd_cap_capacity(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    spec = _parse_set(args.set)
    rep = capacity(
        spec, kernel=args.kernel, gamma=args.gamma, m=args.m,
        kappa=args.kappa, rel_tol=args.rel_tol,
    )
    payload = {
        "set": args.set, "kernel": args.kernel, "gamma": args.gamma, "m": args.m,
        "kappa": args.kappa,
        "capacity": _sanitize(rep.capacity),
        "energy": _sanitize(rep.energy),
        "gap": _sanitize(rep.gap),
        "iterations": rep.iterations,
        "method": rep.method,
    }
    _json_out(args.out, payload)
    _write_run_manifest("cap capacity", seed, payload, [args.out], started)
    return 0


def _cmd_cap_dim(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    spec = _parse_set(args.set)
    payload = {"set": args.set, "dim": _sanitize(parabolic_dim(spec))}
    _json_out(args.out, payload)
    _write_run_manifest("cap dim", seed, payload, [args.out], started)
    return 0


def _cmd_cap_hitting(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    spec = _parse_set(args.set)
    rng = RngStream(seed, stream_id=_S_CLI_HITTING)
    rep = hitting_mc(spec, rng, n_trials=args.trials, dt=args.dt)
    payload = {
        "set": args.set, "trials": args.trials, "dt": args.dt,
        "p_hat": _sanitize(rep.p_hat),
        "ci": [_sanitize(rep.ci[0]), _sanitize(rep.ci[1])],
        "hits": rep.hits,
    }
    _json_out(args.out, payload)
    _write_run_manifest("cap hitting", seed, payload, [args.out], started)
    return 0


def _cmd_cap_image(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    prof = read_profile_csv(args.profile)
    rep = image_geometry(prof.values)
    payload = {
        "profile": args.profile,
        "box_dim": _sanitize(rep.box_dim),
        "covering_length": _sanitize(rep.covering_length),
        "n_distinct": rep.n_distinct,
    }
    _json_out(args.out, payload)
    _write_run_manifest("cap image", seed, payload, [args.out], started)
    return 0


# ---------------------------------------------------------------------------
# test


def _cmd_test_list(args: argparse.Namespace) -> int:
    for name in sorted(build_checks(0)):
        print(name)
    return 0


def _cmd_test_run(args: argparse.Namespace) -> int:
    started = _utc_now()
    seed = _resolve_seed(args)
    tags = args.tags.split(",") if args.tags else None
    reports = run_acceptance(seed, tags=tags)
    for rep in reports:
        print(rep.line())
    all_passed = all(rep.passed for rep in reports)
    if args.report is not None:
        # Pure function of (registry, seed): runtimes are deliberately
        # excluded so reruns produce identical bytes.
        payload = {
            "suite": args.suite,
            "seed": seed,
            "all_passed": all_passed,
            "reports": [
                {
                    "name": rep.name,
                    "statistic": _sanitize(rep.statistic),
                    "p_value": _sanitize(rep.p_value),
                    "threshold": _sanitize(rep.threshold),
                    "passed": rep.passed,
                    "n": list(rep.n),
                    "seeds": list(rep.seeds),
                }
                for rep in reports
            ],
        }
        _json_out(args.report, payload)
        _write_run_manifest(
            "test run", seed,
            {"suite": args.suite, "tags": args.tags},
            [args.report], started,
        )
    return 0 if all_passed else 3


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="global seed; LANDSCAPE_LAB_SEED when absent")
    common.add_argument(
        "--threads", type=int, default=0,
        help="worker hint (0 = all cores); results never depend on it",
    )

    ap = argparse.ArgumentParser(
        prog="landscape-lab",
        description="Desk-scale simulations of the scaled corner growth landscape.",
    )
    ap.add_argument("--version", action="version", version=f"landscape-lab {__version__}")
    groups = ap.add_subparsers(dest="group", required=True)

    # sim
    sim = groups.add_parser("sim", help="draw seeded samples").add_subparsers(dest="cmd", required=True)

    p = sim.add_parser("melon", parents=[common], help="melon of independent walks")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--lines", type=int, default=None, help="top lines to write (default: all)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sim_melon)

    p = sim.add_parser("airy-ensemble", parents=[common], help="edge-rescaled top lines")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--y-max", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=2e-4)
    p.add_argument("--lines", type=int, default=1)
    p.add_argument("--normalization", choices=("affine", "shape_exact"), default="affine")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sim_airy_ensemble)

    p = sim.add_parser("airy-sheet", parents=[common], help="two-parameter sheet sample")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--dt", type=float, default=2e-4)
    p.add_argument("--x-window", default="-1,1")
    p.add_argument("--y-window", default="-1,1")
    p.add_argument("--x-points", type=int, default=60)
    p.add_argument("--y-points", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sim_airy_sheet)

    # kpz
    kpz = groups.add_parser("kpz", help="fixed-point evolution").add_subparsers(dest="cmd", required=True)

    def _evolve_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--init", required=True, help="initial data JSON")
        p.add_argument("--t", type=float, default=1.0)
        p.add_argument("--n", type=int, default=100)
        p.add_argument("--dt", type=float, default=2e-4)
        p.add_argument("--y-window", default="-1,1")

    p = kpz.add_parser("evolve", parents=[common], help="evolve initial data")
    _evolve_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_kpz_evolve)

    p = kpz.add_parser("records", parents=[common], help="record set of an evolved profile")
    _evolve_flags(p)
    p.add_argument("--a", type=float, default=None, help="left endpoint (default: window start)")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--window", default=None, help="report whether records land in 'b,c'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_kpz_records)

    p = kpz.add_parser("coalesce", parents=[common], help="coupled evolution and coalescence time")
    p.add_argument("--init-a", required=True)
    p.add_argument("--init-b", required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--dt", type=float, default=2e-4)
    p.add_argument("--y-window", default="0,2")
    p.add_argument("--y", type=float, default=0.0, help="watch increments above this point")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--profiles-out", default=None, help="optional CSV with both profiles")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_kpz_coalesce)

    p = kpz.add_parser("quadrangle", parents=[common], help="sheet rectangle diagnostics")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--dt", type=float, default=2e-4)
    p.add_argument("--x-window", default="0,1")
    p.add_argument("--y-window", default="0,1")
    p.add_argument("--x-points", type=int, default=5)
    p.add_argument("--y-points", type=int, default=None)
    p.add_argument("--base", default="0,0", help="rectangle base corner 'x,y'")
    p.add_argument("--sizes", default=None, help="square sizes, comma separated")
    p.add_argument("--sheet-out", default=None, help="optional CSV with the sampled sheet")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_kpz_quadrangle)

    # cap
    cap = groups.add_parser("cap", help="capacity and dimension tools").add_subparsers(dest="cmd", required=True)

    def _set_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("--set", required=True, help="box:t0,t1,x0,x1 | point:t,x | empty")

    p = cap.add_parser("energy", parents=[common], help="energy of the uniform measure")
    _set_flag(p)
    p.add_argument("--kernel", choices=("riesz", "thermal"), default="riesz")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cap_energy)

    p = cap.add_parser("capacity", parents=[common], help="capped capacity via energy minimisation")
    _set_flag(p)
    p.add_argument("--kernel", choices=("riesz", "thermal"), default="riesz")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--kappa", type=float, default=4.0)
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cap_capacity)

    p = cap.add_parser("dim", parents=[common], help="parabolic box dimension")
    _set_flag(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cap_dim)

    p = cap.add_parser("hitting", parents=[common], help="Monte Carlo hitting probability")
    _set_flag(p)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cap_hitting)

    p = cap.add_parser("image", parents=[common], help="image geometry of a profile CSV")
    p.add_argument("--profile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cap_image)

    # test
    test = groups.add_parser("test", help="acceptance checks").add_subparsers(dest="cmd", required=True)

    p = test.add_parser("list", parents=[common], help="list check names")
    p.set_defaults(func=_cmd_test_list)

    p = test.add_parser("run", parents=[common], help="run checks and write a report")
    p.add_argument("--suite", choices=("acceptance",), default="acceptance")
    p.add_argument("--tags", default=None, help="comma separated name filters")
    p.add_argument("--report", default=None, help="JSON report path")
    p.set_defaults(func=_cmd_test_run)

    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return 0 if code == 0 else 2
    try:
        return args.func(args)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))
