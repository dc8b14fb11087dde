"""Session artifacts drawn once through the landscape-lab command line.

The figures package consumes only published CSV output, so the fixtures
shell out to the real CLI rather than importing the simulator.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

FLAT = {"type": "flat", "level": 0.0, "support": [0.0, 1.0]}
WEDGES = {
    "type": "narrow_wedges",
    "points": [{"x": 0.0, "h": 0.0}, {"x": 1.0, "h": 0.0}],
}


def lab_command() -> list[str]:
    exe = shutil.which("landscape-lab")
    if exe is not None:
        return [exe]
    return [sys.executable, "-m", "landscape_lab"]


def run_lab(args: list[str]) -> None:
    proc = subprocess.run(lab_command() + args, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"landscape-lab {' '.join(args)} failed:\n{proc.stderr}")


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory: pytest.TempPathFactory) -> dict[str, Path]:
    root = tmp_path_factory.mktemp("artifacts")
    flat = root / "flat.json"
    wedges = root / "wedges.json"
    flat.write_text(json.dumps(FLAT))
    wedges.write_text(json.dumps(WEDGES))

    out = {
        "profile_a": root / "profile_a.csv",
        "profile_b": root / "profile_b.csv",
        "bm": root / "bm.csv",
        "sheet_1": root / "sheet_1.csv",
        "sheet_2": root / "sheet_2.csv",
    }
    # Same seed, same window: the two evolutions share driving noise and
    # grid, which is what the overlay figure assumes.
    evolve = ["--t", "1.0", "--n", "60", "--dt", "0.002", "--y-window", "0,1", "--seed", "7"]
    run_lab(["kpz", "evolve", "--init", str(flat), *evolve, "--out", str(out["profile_a"])])
    run_lab(["kpz", "evolve", "--init", str(wedges), *evolve, "--out", str(out["profile_b"])])
    run_lab(
        ["sim", "melon", "--n", "1", "--t", "1.0", "--dt", "0.002", "--seed", "3", "--out", str(out["bm"])]
    )
    sheet = ["--n", "60", "--dt", "0.001", "--x-window", "0,0.5", "--y-window", "0,0.5", "--x-points", "3"]
    run_lab(["sim", "airy-sheet", *sheet, "--seed", "1", "--out", str(out["sheet_1"])])
    run_lab(["sim", "airy-sheet", *sheet, "--seed", "2", "--out", str(out["sheet_2"])])
    return out
