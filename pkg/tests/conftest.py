"""Acceptance registry: each acceptance test records one PASS/FAIL line."""

import pytest

ACCEPTANCE = {k: ("FAIL", "not run") for k in range(1, 13)}


@pytest.fixture
def record():
    def _record(criterion: int, passed: bool, detail: str):
        ACCEPTANCE[criterion] = ("PASS" if passed else "FAIL", detail)
        assert passed, f"criterion {criterion}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"ACCEPTANCE {k:2d} {status}  {detail}")
