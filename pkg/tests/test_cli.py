"""Command line behavior: exit codes, manifests, reproducibility."""

from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

import landscape_lab.cli as cli
from landscape_lab.acceptance import build_checks
from landscape_lab.io import read_ensemble_csv, read_manifest, read_profile_csv, save_initial_json
from landscape_lab.kpz import NarrowWedges, evolve
from landscape_lab.rng import RngStream
from landscape_lab.stats import TestReport


def _run(*argv: str) -> int:
    return cli.main(list(argv))


def test_melon_writes_csv_and_manifest(tmp_path) -> None:
    out = tmp_path / "melon.csv"
    code = _run("sim", "melon", "--n", "6", "--t", "0.5", "--dt", "0.01",
                "--seed", "3", "--out", str(out))
    assert code == 0
    times, lines = read_ensemble_csv(out)
    assert lines.shape == (6, times.size)
    # Melon lines are ordered top down everywhere.
    assert np.all(np.diff(lines, axis=0) <= 1e-12)
    man = read_manifest(tmp_path / "melon.manifest.json")
    assert man.command == "sim melon" and man.seed == 3
    assert man.outputs == (str(out),)
    assert man.config_hash != "" and man.version != ""


def test_same_seed_reproduces_bytes(tmp_path) -> None:
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ("sim", "airy-ensemble", "--n", "40", "--y-max", "0.3", "--dt", "0.002",
            "--lines", "2", "--seed", "11")
    assert _run(*args, "--out", str(a)) == 0
    assert _run(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    assert _run(*args[:-1], "12", "--out", str(c)) == 0
    assert a.read_bytes() != c.read_bytes()


def test_usage_errors_exit_2(tmp_path, capsys) -> None:
    assert _run("sim", "melon") == 2
    assert _run("no-such-group") == 2
    assert _run("cap", "energy", "--set", "empty", "--kernel", "cubic",
                "--out", str(tmp_path / "x.json")) == 2
    capsys.readouterr()


def test_domain_errors_exit_1(tmp_path, capsys) -> None:
    out = str(tmp_path / "x.csv")
    assert _run("sim", "airy-sheet", "--x-window", "1,0", "--out", out) == 1
    assert _run("kpz", "evolve", "--init", str(tmp_path / "missing.json"), "--out", out) == 1
    err = capsys.readouterr().err
    assert "error:" in err


def test_version_and_help_exit_0(capsys) -> None:
    assert _run("--version") == 0
    assert "landscape-lab" in capsys.readouterr().out
    assert _run("--help") == 0
    capsys.readouterr()


def test_evolve_matches_library_call(tmp_path) -> None:
    init = tmp_path / "h0.json"
    save_initial_json(init, NarrowWedges(points=((0.0, 0.0),)))
    out = tmp_path / "prof.csv"
    code = _run("kpz", "evolve", "--init", str(init), "--t", "1.0", "--n", "60",
                "--dt", "0.002", "--y-window=-0.3,0.3", "--seed", "5", "--out", str(out))
    assert code == 0
    prof = read_profile_csv(out)
    direct = evolve(
        NarrowWedges(points=((0.0, 0.0),)), 1.0,
        RngStream(5, stream_id=14), n=60, dt=2e-3, y_window=(-0.3, 0.3),
    )
    assert np.array_equal(prof.values, direct.values)


def test_records_payload(tmp_path) -> None:
    init = tmp_path / "h0.json"
    save_initial_json(init, NarrowWedges(points=((0.0, 0.0),)))
    out = tmp_path / "rec.json"
    code = _run("kpz", "records", "--init", str(init), "--t", "1.0", "--n", "60",
                "--dt", "0.002", "--y-window=-0.3,0.3", "--seed", "5",
                "--window", "0.0,0.3", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    times = np.asarray(payload["record_times"])
    assert payload["n_records"] == times.size >= 1
    assert np.all(np.diff(times) > 0)
    # Default a is the profile grid start, which covers the requested window.
    assert payload["a"] <= -0.3 and payload["a"] == pytest.approx(-0.3, abs=0.02)
    assert isinstance(payload["hit_in_window"], bool)


def test_coalesce_identical_inits(tmp_path) -> None:
    init = tmp_path / "h0.json"
    save_initial_json(init, NarrowWedges(points=((0.5, 0.0),)))
    out = tmp_path / "coal.json"
    profs = tmp_path / "profs.csv"
    code = _run("kpz", "coalesce", "--init-a", str(init), "--init-b", str(init),
                "--t", "1.0", "--n", "60", "--dt", "0.002", "--y-window", "0,1",
                "--seed", "6", "--profiles-out", str(profs), "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    # Identical data share every increment, so tau is the first grid step past y.
    assert payload["coalesced"] is True and 0.0 < payload["tau"] < 0.05
    _, lines = read_ensemble_csv(profs)
    assert lines.shape[0] == 2
    assert np.array_equal(lines[0], lines[1])


def test_quadrangle_payload(tmp_path) -> None:
    out = tmp_path / "quad.json"
    code = _run("kpz", "quadrangle", "--n", "60", "--dt", "0.001",
                "--x-window", "0,0.5", "--y-window", "0,0.5",
                "--x-points", "3", "--base", "0,0", "--sizes", "0.25,0.5",
                "--seed", "7", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert set(payload["delta"]) == {"0.25", "0.5"}
    assert all(v >= -1e-9 for v in payload["delta"].values())
    assert payload["min_gap"] >= -1e-9


def test_cap_commands(tmp_path) -> None:
    out = tmp_path / "cap.json"
    # A time segment counts doubly under parabolic scaling.
    assert _run("cap", "dim", "--set", "box:0,1,0,0", "--out", str(out)) == 0
    assert json.loads(out.read_text())["dim"] == pytest.approx(2.0, abs=0.1)
    assert _run("cap", "energy", "--set", "point:0,0", "--out", str(out)) == 0
    # Atom energies are infinite; JSON carries them as their repr string.
    assert json.loads(out.read_text())["energy"] == "inf"
    assert _run("cap", "hitting", "--set", "box:1,2,0,0", "--trials", "200",
                "--dt", "0.001", "--seed", "9", "--out", str(out)) == 0
    payload = json.loads(out.read_text())
    assert 0.0 < payload["p_hat"] < 1.0
    assert payload["ci"][0] <= payload["p_hat"] <= payload["ci"][1]
    prof = tmp_path / "prof.csv"
    from landscape_lab.grids import Grid, GridFunction
    from landscape_lab.io import write_profile_csv
    write_profile_csv(prof, GridFunction(Grid(0.0, 0.01, 64), RngStream(10, stream_id=13).normals(64)))
    assert _run("cap", "image", "--profile", str(prof), "--out", str(out)) == 0
    assert json.loads(out.read_text())["n_distinct"] == 64


def test_list_names_match_registry(capsys) -> None:
    assert _run("test", "list") == 0
    names = capsys.readouterr().out.split()
    assert names == sorted(build_checks(0))
    assert len(names) == 14


def test_run_report_and_exit_codes(tmp_path, monkeypatch, capsys) -> None:
    def fake(seed: int, tags=None):
        rep = TestReport(name="stub", statistic=0.1, p_value=0.5, threshold=0.05,
                         passed=tags is None, n=(10,), seeds=(seed,), runtime_s=0.0)
        return [rep]

    monkeypatch.setattr(cli, "run_acceptance", fake)
    report = tmp_path / "report.json"
    assert _run("test", "run", "--seed", "4", "--report", str(report)) == 0
    payload = json.loads(report.read_text())
    assert payload["all_passed"] is True and payload["seed"] == 4
    assert payload["reports"][0]["name"] == "stub"
    assert "[PASS] stub" in capsys.readouterr().out
    assert _run("test", "run", "--seed", "4", "--tags", "stub") == 3
    assert "[FAIL] stub" in capsys.readouterr().out


def test_run_empty_tag_selection_passes(tmp_path) -> None:
    # No check matches, so there is nothing to fail; the report says so.
    report = tmp_path / "report.json"
    assert _run("test", "run", "--tags", "zzz", "--report", str(report)) == 0
    payload = json.loads(report.read_text())
    assert payload["all_passed"] is True and payload["reports"] == []


def test_seed_env_fallback(tmp_path, monkeypatch) -> None:
    out = tmp_path / "melon.csv"
    monkeypatch.setenv("LANDSCAPE_LAB_SEED", "21")
    assert _run("sim", "melon", "--n", "4", "--t", "0.2", "--dt", "0.01", "--out", str(out)) == 0
    assert read_manifest(tmp_path / "melon.manifest.json").seed == 21
    monkeypatch.setenv("LANDSCAPE_LAB_SEED", "pi")
    assert _run("sim", "melon", "--n", "4", "--t", "0.2", "--dt", "0.01", "--out", str(out)) == 1
    monkeypatch.delenv("LANDSCAPE_LAB_SEED")
    assert _run("sim", "melon", "--n", "4", "--t", "0.2", "--dt", "0.01", "--out", str(out)) == 0
    assert read_manifest(tmp_path / "melon.manifest.json").seed == 0


def test_module_entry_help() -> None:
    res = subprocess.run(
        [sys.executable, "-m", "landscape_lab", "--help"],
        capture_output=True, text=True, timeout=120,
    )
    assert res.returncode == 0
    assert "landscape-lab" in res.stdout
