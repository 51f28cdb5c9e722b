import numpy as np
import pytest

from asvgd import _backend


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(_backend.BACKENDS))
def backend(request):
    return request.param
