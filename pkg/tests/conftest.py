import math

import numpy as np
import pytest
from hypothesis import settings

from limitlab.poly import ComplexPolynomial, find_attracting_cycles

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# fixed point of z^2 + 0.1 from the quadratic formula: (1 - sqrt(0.6)) / 2
Z_STAR_01 = (1 - math.sqrt(0.6)) / 2
BETA_01 = (1 + math.sqrt(0.6)) / 2


def poly(text: str) -> ComplexPolynomial:
    return ComplexPolynomial.from_string(text)


@pytest.fixture(scope="session")
def z2():
    return poly("0,0,1")


@pytest.fixture(scope="session")
def z2c():
    return poly("0.1,0,1")


@pytest.fixture(scope="session")
def basilica():
    return poly("-1,0,1")


@pytest.fixture(scope="session")
def gamma01(z2c):
    from limitlab.fatou import boundary_parametrization

    return boundary_parametrization(z2c, Z_STAR_01)


@pytest.fixture(scope="session")
def conj01(z2c):
    from limitlab.conjugacy import conjugacy_map

    return conjugacy_map(z2c, Z_STAR_01, 6)


@pytest.fixture(scope="session")
def conj_z2(z2):
    from limitlab.conjugacy import conjugacy_map

    return conjugacy_map(z2, 0j, 6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def attracting_fixed(p):
    return [c.points[0] for c in find_attracting_cycles(p).cycles if c.period == 1]


@pytest.fixture(scope="session")
def henon_params(z2c):
    from limitlab.henon import HenonParams

    return HenonParams(z2c, 0.05)


@pytest.fixture(scope="session")
def henon_run(henon_params, gamma01):
    from limitlab.henon import accessible_boundary_sample

    return accessible_boundary_sample(henon_params, directions=64, gamma=gamma01)
