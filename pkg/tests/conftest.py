import numpy as np
import pytest

from formmhd.fields import GridSpec


@pytest.fixture(scope="session")
def grid3():
    return GridSpec(3, 16)


@pytest.fixture(scope="session")
def grid4():
    return GridSpec(4, 8)


def rel(a, b):
    """Relative max-abs difference of two arrays against the larger of the two."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0))
    d = np.abs(a - b).max(initial=0.0)
    return d / scale if scale > 0 else d


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
