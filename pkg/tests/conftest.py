import numpy as np
import pytest

from pst import model

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_change():
    """n=40, r=3 change by 40 degrees with a generous measurement budget."""
    return model.draw_change(40, 3, 120, 80, np.deg2rad(40), rng=7)


@pytest.fixture
def acceptance_report():
    def report(criterion, passed, detail):
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        line = f"[{status}] criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
