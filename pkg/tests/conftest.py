import math

import pytest

from revsphere.common.types import SurfacePoint
from revsphere.geometry.profiles import (
    h_generator,
    make_h_profile,
    make_lambda_profile,
    make_theorem_a,
    make_unit_sphere,
)


@pytest.fixture(scope='session')
def unit_sphere():
    return make_unit_sphere()


@pytest.fixture(scope='session')
def lambda1():
    return make_lambda_profile(1.0)


@pytest.fixture(scope='session')
def lambda4():
    return make_lambda_profile(4.0)


@pytest.fixture(scope='session')
def lambda8():
    return make_lambda_profile(8.0)


@pytest.fixture(scope='session')
def h_family():
    return make_h_profile(h_generator(0.25, 3))


@pytest.fixture(scope='session')
def theorem_a8():
    return make_theorem_a(8)


@pytest.fixture(scope='session')
def base_point():
    return SurfacePoint(r=math.pi / 3, theta=0.0)
