import numpy as np
import pytest

from momentbounds import GeneratorSpec, make_from_generator, make_naive


@pytest.fixture(scope="session")
def naive_third():
    return make_naive(1.0 / 3.0)


@pytest.fixture(scope="session")
def naive_quarter():
    return make_naive(0.25)


@pytest.fixture(scope="session")
def naive_one():
    return make_naive(1.0)


@pytest.fixture(scope="session")
def gen_sinx2():
    """The generator-backed function behind the tables' mixed column."""
    return make_from_generator(GeneratorSpec("sin-of-square", (), 0.125))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
