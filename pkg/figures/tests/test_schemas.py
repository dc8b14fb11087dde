"""Readers against real CLI artifacts, plus synthetic malformed inputs."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from landscape_figures.schemas import (
    SchemaError,
    read_curve,
    read_ensemble,
    read_profile,
    read_sheet,
)


def test_profile_reads_evolve_output(artifacts: dict[str, Path]) -> None:
    y, h = read_profile(artifacts["profile_a"])
    assert y.shape == h.shape and y.ndim == 1
    assert np.all(np.diff(y) > 0)
    assert np.isfinite(h).all()


def test_coupled_profiles_share_grid(artifacts: dict[str, Path]) -> None:
    ya, _ = read_profile(artifacts["profile_a"])
    yb, _ = read_profile(artifacts["profile_b"])
    np.testing.assert_array_equal(ya, yb)


def test_ensemble_reads_melon_output(artifacts: dict[str, Path]) -> None:
    t, lines = read_ensemble(artifacts["bm"])
    assert lines.shape == (1, t.size)
    assert np.all(np.diff(t) > 0)
    assert np.isfinite(lines).all()


def test_curve_dispatches_on_header(artifacts: dict[str, Path]) -> None:
    grid, vals, name = read_curve(artifacts["profile_a"])
    assert name == "y" and grid.size == vals.size
    grid, vals, name = read_curve(artifacts["bm"])
    assert name == "t" and grid.size == vals.size


def test_sheet_reads_cli_output(artifacts: dict[str, Path]) -> None:
    x, y, s = read_sheet(artifacts["sheet_1"])
    # Requested points snap to the sampler's internal grid, but the
    # origin is always representable exactly.
    assert x[0] == 0.0 and y[0] == 0.0
    np.testing.assert_allclose(x, [0.0, 0.25, 0.5], atol=5e-3)
    np.testing.assert_allclose(y, [0.0, 0.25, 0.5], atol=5e-3)
    assert s.shape == (3, 3)
    assert np.isfinite(s).all()


def test_every_artifact_reads_without_warnings(artifacts: dict[str, Path]) -> None:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        read_profile(artifacts["profile_a"])
        read_profile(artifacts["profile_b"])
        read_ensemble(artifacts["bm"])
        read_sheet(artifacts["sheet_1"])
        read_sheet(artifacts["sheet_2"])


def test_sheet_row_order_does_not_matter(tmp_path: Path, artifacts: dict[str, Path]) -> None:
    lines = artifacts["sheet_1"].read_text().strip().splitlines()
    shuffled = tmp_path / "shuffled.csv"
    shuffled.write_text("\n".join([lines[0]] + lines[:0:-1]) + "\n")
    x, y, s = read_sheet(shuffled)
    _, _, s_ref = read_sheet(artifacts["sheet_1"])
    np.testing.assert_array_equal(s, s_ref)


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(SchemaError, match="does not exist"):
        read_profile(tmp_path / "nope.csv")


def test_empty_file(tmp_path: Path) -> None:
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        read_curve(p)


def test_wrong_profile_header_names_columns(tmp_path: Path) -> None:
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n0,0\n1,1\n")
    with pytest.raises(SchemaError, match=r"\['a', 'b'\]"):
        read_profile(p)


def test_ragged_rows(tmp_path: Path) -> None:
    p = tmp_path / "ragged.csv"
    p.write_text("y,h\n0,0\n1\n")
    with pytest.raises(SchemaError, match="ragged"):
        read_profile(p)


def test_non_numeric_cell(tmp_path: Path) -> None:
    p = tmp_path / "text.csv"
    p.write_text("y,h\n0,zero\n1,1\n")
    with pytest.raises(SchemaError, match="non-numeric"):
        read_profile(p)


def test_single_row_profile(tmp_path: Path) -> None:
    p = tmp_path / "short.csv"
    p.write_text("y,h\n0,0\n")
    with pytest.raises(SchemaError, match="two rows"):
        read_profile(p)


def test_ensemble_rejects_misnamed_lines(tmp_path: Path) -> None:
    p = tmp_path / "walks.csv"
    p.write_text("t,walk_1\n0,0\n1,1\n")
    with pytest.raises(SchemaError, match=r"line_1"):
        read_ensemble(p)


def test_sheet_rejects_incomplete_grid(tmp_path: Path, artifacts: dict[str, Path]) -> None:
    lines = artifacts["sheet_1"].read_text().strip().splitlines()
    p = tmp_path / "holes.csv"
    p.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(SchemaError, match="full grid"):
        read_sheet(p)


def test_sheet_rejects_wrong_header(tmp_path: Path) -> None:
    p = tmp_path / "t.csv"
    p.write_text("x,y,z\n0,0,0\n")
    with pytest.raises(SchemaError, match=r"\['x', 'y', 'S'\]"):
        read_sheet(p)
