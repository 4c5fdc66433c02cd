import numpy as np
import pytest

from ghostsim import Image, digit, gaussian_blob


@pytest.fixture(scope="session")
def digit3():
    return digit(3)


@pytest.fixture(scope="session")
def digit7():
    return digit(7)


@pytest.fixture(scope="session")
def blob():
    # offset so rotations are observable on an otherwise symmetric bump
    return gaussian_blob(64, sigma=8.0, offset=(6.0, 4.0))


@pytest.fixture(scope="session")
def compound():
    # three bumps at different radii; decorrelates fast under rotation
    a = gaussian_blob(64, 5.0, offset=(8.0, 3.0)).data
    b = gaussian_blob(64, 3.0, offset=(-6.0, -9.0)).data
    c = gaussian_blob(64, 2.5, offset=(2.0, 12.0)).data
    return Image(a + 0.7 * b + 0.5 * c)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
