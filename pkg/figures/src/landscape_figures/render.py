"""Figure assembly from validated artifacts.

Three figure kinds, mirroring the three artifact shapes:

- panels: two curves side by side with shared vertical limits, the
  standard fixed-point-vs-Brownian comparison.
- overlay: two profiles on one shared grid, with the region before their
  increments agree shaded.
- surfaces: four sheets as a 1x4 surface strip; the fourth panel shows
  the rectangle remainder S(x,y) - S(x,0) - S(0,y) + S(0,0) of the
  fourth input, checked for nonnegativity before any drawing happens.

Rendering is deterministic: fixed canvas size, default fonts, no
timestamps in the output metadata.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, read_curve, read_profile, read_sheet

_GRID_TOL = 1e-9


class PrecheckError(ValueError):
    """A data precondition failed before any drawing happened."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str  # "panels" | "overlay" | "surfaces"
    inputs: tuple[Path, ...]
    out: Path
    labels: tuple[str, ...] = ()
    tol: float = 1e-6
    dpi: int = 150

    _ARITY = {"panels": 2, "overlay": 2, "surfaces": 4}

    def __post_init__(self) -> None:
        if self.kind not in self._ARITY:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        want = self._ARITY[self.kind]
        if len(self.inputs) != want:
            raise SchemaError(f"{self.kind} needs {want} inputs, got {len(self.inputs)}")
        if self.out.suffix.lower() not in (".png", ".svg"):
            raise SchemaError(f"output must be .png or .svg, got {self.out.name}")
        if self.tol < 0:
            raise SchemaError("tol must be nonnegative")


def _label(spec: FigureSpec, i: int, fallback: str) -> str:
    return spec.labels[i] if i < len(spec.labels) else fallback


def _save(fig: "plt.Figure", spec: FigureSpec) -> Path:
    if spec.out.suffix.lower() == ".svg":
        # Unsalted SVG output numbers its element ids from a fresh uuid,
        # which breaks byte-for-byte reproducibility.
        with matplotlib.rc_context({"svg.hashsalt": "landscape-figures"}):
            fig.savefig(spec.out, dpi=spec.dpi, metadata={"Date": None})
    else:
        fig.savefig(spec.out, dpi=spec.dpi)
    plt.close(fig)
    return spec.out


def _render_panels(spec: FigureSpec) -> Path:
    curves = [read_curve(p) for p in spec.inputs]
    lo = min(float(np.min(c[1])) for c in curves)
    hi = max(float(np.max(c[1])) for c in curves)
    pad = 0.05 * (hi - lo or 1.0)
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.4), sharey=True)
    for i, (ax, (grid, vals, xname)) in enumerate(zip(axes, curves)):
        ax.plot(grid, vals, lw=1.0, color="C0" if i == 0 else "C1")
        ax.set_xlabel(xname)
        ax.set_title(_label(spec, i, spec.inputs[i].stem))
        ax.set_ylim(lo - pad, hi + pad)
    axes[0].set_ylabel("height")
    fig.tight_layout()
    return _save(fig, spec)


def _agreement_start(y: np.ndarray, d: np.ndarray, tol: float) -> float | None:
    """First grid value past which d stays within tol of its end value,
    requiring at least one full agreeing step."""
    off = np.abs(d - d[-1]) > tol
    if not off.any():
        return float(y[0])
    j = int(np.flatnonzero(off)[-1]) + 1
    if j >= y.size - 1:
        return None
    return float(y[j])


def _render_overlay(spec: FigureSpec) -> Path:
    ya, ha = read_profile(spec.inputs[0])
    yb, hb = read_profile(spec.inputs[1])
    if ya.size != yb.size or np.max(np.abs(ya - yb)) > _GRID_TOL:
        raise SchemaError(
            f"overlay inputs must share a grid: {spec.inputs[0]} has "
            f"{ya.size} rows on [{ya[0]:g}, {ya[-1]:g}], {spec.inputs[1]} has "
            f"{yb.size} rows on [{yb[0]:g}, {yb[-1]:g}]"
        )
    tau = _agreement_start(ya, ha - hb, spec.tol)
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.plot(ya, ha, lw=1.1, color="C0", label=_label(spec, 0, spec.inputs[0].stem))
    ax.plot(ya, hb, lw=1.1, color="C1", label=_label(spec, 1, spec.inputs[1].stem))
    if tau is None:
        ax.axvspan(ya[0], ya[-1], color="0.85", zorder=0)
        ax.set_title("profiles never agree in this window")
    else:
        if tau > ya[0]:
            ax.axvspan(ya[0], tau, color="0.85", zorder=0)
        ax.axvline(tau, color="0.4", lw=0.8, ls="--")
        ax.set_title(f"increments agree past {tau:g} (tol {spec.tol:g})")
    ax.set_xlabel("y")
    ax.set_ylabel("height")
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    return _save(fig, spec)


def _remainder(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, y, s = read_sheet(path)
    ix = np.flatnonzero(np.abs(x) <= _GRID_TOL)
    iy = np.flatnonzero(np.abs(y) <= _GRID_TOL)
    if ix.size != 1 or iy.size != 1:
        raise SchemaError(f"{path}: the remainder panel needs x = 0 and y = 0 on the grid")
    i0, j0 = int(ix[0]), int(iy[0])
    f = s - s[:, j0][:, None] - s[i0, :][None, :] + s[i0, j0]
    return x, y, f


def _render_surfaces(spec: FigureSpec) -> Path:
    sheets = [read_sheet(p) for p in spec.inputs[:3]]
    x4, y4, f4 = _remainder(spec.inputs[3])
    worst = float(np.min(f4))
    if worst < -1e-9:
        raise PrecheckError(
            f"{spec.inputs[3]}: rectangle remainder dips to {worst:.3e} < -1e-9"
        )
    sheets.append((x4, y4, f4))

    fig = plt.figure(figsize=(13.0, 3.4))
    titles = [
        _label(spec, 0, spec.inputs[0].stem),
        _label(spec, 1, spec.inputs[1].stem),
        _label(spec, 2, spec.inputs[2].stem),
        _label(spec, 3, "remainder"),
    ]
    for i, (x, y, v) in enumerate(sheets):
        ax = fig.add_subplot(1, 4, i + 1, projection="3d")
        gx, gy = np.meshgrid(x, y, indexing="ij")
        ax.plot_surface(gx, gy, v, cmap="viridis", linewidth=0, antialiased=True)
        ax.set_title(titles[i], fontsize=9)
        ax.set_xlabel("x", fontsize=8)
        ax.set_ylabel("y", fontsize=8)
        ax.tick_params(labelsize=6)
    fig.tight_layout()
    return _save(fig, spec)


_RENDERERS = {
    "panels": _render_panels,
    "overlay": _render_overlay,
    "surfaces": _render_surfaces,
}


def render(spec: FigureSpec) -> Path:
    """Write the figure for spec and return its path."""
    return _RENDERERS[spec.kind](spec)
