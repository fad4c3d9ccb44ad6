import numpy as np
import pytest

from jacobi_workbench.fields import solid_harmonic, zonal_polynomial
from jacobi_workbench.sphere import make_grid
from jacobi_workbench.variation import RadialVariation

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 32)


@pytest.fixture(scope="session")
def grid3_zonal():
    return make_grid(3, 64, zonal=True)


@pytest.fixture(scope="session")
def y20_variation(grid2):
    return RadialVariation(solid_harmonic(2, 0), grid2)


@pytest.fixture(scope="session")
def zonal3_variation(grid3_zonal):
    return RadialVariation(zonal_polynomial(3, 2), grid3_zonal)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
