"""Exception hierarchy. Domain violations map to CLI exit code 1."""

from __future__ import annotations


class LabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LabError):
    """Arguments outside an operation's domain (bad windows, levels, gamma < 0, ...)."""


class AlignmentError(DomainError):
    """A time that must lie on the grid does not."""


class GridMismatchError(DomainError):
    """Two objects that must share a grid do not."""


class EmptySupportError(DomainError):
    """Initial data whose max-plus support is empty."""


class WindowTooSmallError(DomainError):
    """Required evaluation region exceeds the available sheet window."""


class FinitaryError(DomainError):
    """Initial data fails the growth condition needed at the requested time."""


class InfeasibleRegionError(DomainError):
    """Conditioning region admits no strictly ordered configuration."""
