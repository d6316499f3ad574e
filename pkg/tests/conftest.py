import pytest

from dtcbf import car as carmod
from dtcbf import fixedwing as fwmod
from dtcbf.params import default_params


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def sim(params):
    return params[0]


@pytest.fixture(scope="session")
def fw(params):
    return params[1]


@pytest.fixture(scope="session")
def car(params):
    return params[2]


@pytest.fixture(scope="session")
def fw_barrier(fw, sim):
    return fwmod.flight_envelope_barrier(fw, sim)


@pytest.fixture(scope="session")
def car_barrier(car, sim):
    return carmod.combined_barrier(car, sim)
