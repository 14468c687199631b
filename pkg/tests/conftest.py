import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def unit_rows(rng, n, d):
    M = rng.standard_normal((n, d))
    return M / np.linalg.norm(M, axis=1, keepdims=True)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line and assert it.

    Lines are printed together in the terminal summary, so the outcome of
    every criterion is visible even when test output is captured.
    """

    def check(number, name, passed, detail):
        _CRITERIA.append((number, name, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'} criterion {number} ({name}): {detail}")
        assert passed, f"criterion {number} ({name}) failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number} ({name}): {detail}")
