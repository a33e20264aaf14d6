import numpy as np
import pytest

from telegraph.spectral import ProblemParams


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


@pytest.fixture
def unit_period():
    """omega = 2 pi, so the period is 1."""
    return ProblemParams(omega=2 * np.pi, mu=1.0, K=6, N=6)


@pytest.fixture
def small():
    return ProblemParams(omega=1.0, mu=0.5, K=5, N=5)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
