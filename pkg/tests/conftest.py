import numpy as np
import pytest

from signorini_orlicz.mesh import build_half_disc
from signorini_orlicz.orlicz import make_nfunction
from signorini_orlicz.solver import BoundaryData, solve_thin_obstacle


@pytest.fixture(scope="session")
def linear_g():
    return make_nfunction("power", {"p": 1})


@pytest.fixture(scope="session")
def mesh_coarse():
    return build_half_disc(1.0, 0.1)


@pytest.fixture(scope="session")
def mesh04():
    return build_half_disc(1.0, 0.04)


@pytest.fixture(scope="session")
def mesh02():
    return build_half_disc(1.0, 0.02)


@pytest.fixture(scope="session")
def signorini04(mesh04, linear_g):
    u, rep = solve_thin_obstacle(mesh04, linear_g, BoundaryData("signorini_trace"))
    return mesh04, u, rep


@pytest.fixture(scope="session")
def signorini02(mesh02, linear_g):
    u, rep = solve_thin_obstacle(mesh02, linear_g, BoundaryData("signorini_trace"))
    return mesh02, u, rep


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    lines = test_acceptance.verdict_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
