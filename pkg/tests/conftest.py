import pytest

from grass.presets import system


@pytest.fixture(scope="session")
def lu():
    return system("LU")


@pytest.fixture(scope="session")
def lu_space(lu):
    return lu[0]


@pytest.fixture(scope="session")
def lu_backend(lu):
    return lu[1]


@pytest.fixture(scope="session")
def fh():
    return system("fh")
