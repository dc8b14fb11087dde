"""Figures from persisted landscape-lab artifacts.

This package never simulates anything: it reads the CSV schemas the
landscape-lab command line writes and turns them into figure files.
"""

from .render import FigureSpec, PrecheckError, render
from .schemas import SchemaError, read_curve, read_ensemble, read_profile, read_sheet

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "PrecheckError",
    "SchemaError",
    "read_curve",
    "read_ensemble",
    "read_profile",
    "read_sheet",
    "render",
]
