import numpy as np
import pytest

from refdelay import Grid, GridPath, InitialCondition


@pytest.fixture
def unit_grid():
    return Grid(1.0, 8)


def path_from(fn, grid, eta_value=0.0, r=1.0):
    return GridPath.from_function(fn, grid, InitialCondition.constant(eta_value, r))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
