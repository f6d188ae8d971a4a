from __future__ import annotations

import pytest

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Record the outcome of an acceptance criterion for the summary table."""

    def _record(criterion: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE[criterion] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE, key=lambda c: int(c.split()[0])):
        passed, detail = _ACCEPTANCE[criterion]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {criterion}: {detail}")
