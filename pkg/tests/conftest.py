"""Shared fixtures and the acceptance-criteria report."""
from __future__ import annotations

import pytest

_CRITERIA: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    """Log one acceptance criterion outcome for the end-of-session report."""
    _CRITERIA.append((name, passed, detail))


@pytest.hookimpl
def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(_CRITERIA):
        status = "PASS" if passed else "FAIL"
        line = f"{name}: {status}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
