"""One test per acceptance criterion, each at its stated tolerance.

Every check prints a single pass/fail line; the conftest summary hook
replays them after the run so the full scorecard is visible at a glance.
Checks share sample banks within the process, so the expensive draws
(edge ensembles, sheet grids, coupled pairs) happen once each.
"""

from __future__ import annotations

import pytest

from landscape_lab.acceptance import build_checks

import conftest

ACCEPTANCE_SEED = 42

_CHECKS = build_checks(ACCEPTANCE_SEED)


@pytest.mark.parametrize("name", list(_CHECKS))
def test_criterion(name: str) -> None:
    report = _CHECKS[name]()
    conftest.ACCEPTANCE_LINES.append(report.line())
    print(report.line())
    assert report.passed, report.line()
