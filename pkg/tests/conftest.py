import pytest

from fracfp.grids import Grid1D


@pytest.fixture(scope="session")
def light_grid():
    return Grid1D(4096, 50.0)


@pytest.fixture(scope="session")
def heavy_grid():
    return Grid1D(2 ** 14, 200.0)
