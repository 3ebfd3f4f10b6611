"""Shared fixtures and the acceptance-verdict summary hook."""

import sys

import pytest

from fourier_edge import ArithmeticContext


@pytest.fixture(scope="session")
def ctx15():
    return ArithmeticContext(precision_digits=15)


@pytest.fixture(scope="session")
def ctx30():
    return ArithmeticContext(precision_digits=30)


@pytest.fixture(scope="session")
def ctx50():
    return ArithmeticContext(precision_digits=50)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one PASS/FAIL line per acceptance criterion, printed after the run
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None) if mod else None
    if not results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for criterion, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{criterion} {status}: {detail}")
