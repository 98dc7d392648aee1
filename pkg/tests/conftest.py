import pytest

import chainbound as cb
from chainbound import fixtures as fx


@pytest.fixture(scope="session")
def dyadic_space():
    return fx.dyadic_grid_space(10)


@pytest.fixture(scope="session")
def cloud_space():
    return fx.uniform_square_cloud(500, seed=7)


@pytest.fixture(scope="session")
def sierpinski_space():
    return fx.sierpinski_sample(200, seed=11)


@pytest.fixture(scope="session")
def two_point():
    return fx.two_point_space()


@pytest.fixture(scope="session")
def dims1():
    return cb.euclidean_dims(1)


@pytest.fixture(scope="session")
def dims2():
    return cb.euclidean_dims(2)


@pytest.fixture(scope="session")
def dyadic_net(dyadic_space, dims1):
    return cb.build_net(dyadic_space, dims1)


@pytest.fixture(scope="session")
def cloud_net(cloud_space, dims2):
    return cb.build_net(cloud_space, dims2)
