import numpy as np
import pytest

from spintau.acceptance import random_curve, random_period_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def curve_g2():
    return random_curve(2, np.random.default_rng(11))


@pytest.fixture
def period_matrix_g2(rng):
    return random_period_matrix(2, rng)
