import math

import numpy as np
import pytest

import bandlab as bl


@pytest.fixture(scope="session")
def interval64():
    return bl.uniform_interval(64)


@pytest.fixture(scope="session")
def interval1024():
    return bl.uniform_interval(1024)


@pytest.fixture(scope="session")
def grid16():
    return bl.product_grid(16, 16)


def pnorm_oracle(values, weights, p):
    """Independent norm computation: plain numpy sum, no compensation."""
    if p == math.inf:
        return float(np.max(np.abs(values)))
    return float(np.sum(weights * np.abs(values) ** p) ** (1.0 / p))


def random_function(space, p, rng):
    return bl.LpFunction(space, rng.standard_normal(space.size), p)
