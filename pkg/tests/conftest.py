import numpy as np
import pytest

from faberpt.conformal import ConformalMap
from faberpt.mesh import make_curve

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def kite_mesh():
    return make_curve("kite").mesh(256)


@pytest.fixture(scope="session")
def complex_map():
    return ConformalMap(1.0, [0.2 + 0.1j, 0.3, 0.1j, 0.05 - 0.02j, 0.01j])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
