import pytest

from arrsheaf import build_lattice, catalog


@pytest.fixture(scope="session")
def boolean2():
    return catalog("boolean", 2)


@pytest.fixture(scope="session")
def boolean3():
    return catalog("boolean", 3)


@pytest.fixture(scope="session")
def braid2():
    return catalog("braid", 2)


@pytest.fixture(scope="session")
def braid3():
    return catalog("braid", 3)


@pytest.fixture(scope="session")
def generic34():
    return catalog("generic", 3, 4)


@pytest.fixture(scope="session")
def boolean2_lattice(boolean2):
    return build_lattice(boolean2)


@pytest.fixture(scope="session")
def braid3_lattice(braid3):
    return build_lattice(braid3)


@pytest.fixture(scope="session")
def generic34_lattice(generic34):
    return build_lattice(generic34)
