import pytest

from mfbergman.core import make_grid

# desk scale used by the acceptance criteria
DESK = (40.0, 1024, 40.0, 512, 2.0)
SMALL = (40.0, 256, 40.0, 128, 2.0)


@pytest.fixture(scope="session")
def desk_grid():
    return make_grid(*DESK)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(*SMALL)
