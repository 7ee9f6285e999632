import numpy as np
import pytest

from tempomode.grid import make_grids
from tempomode.modes import hermite_gaussian_basis

CENTER = 2.4e15
SPAN = 4e13


@pytest.fixture
def grids():
    return make_grids(CENTER, SPAN, 256)


@pytest.fixture
def hg_basis(grids):
    return hermite_gaussian_basis(grids[0], CENTER, 2e12, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
