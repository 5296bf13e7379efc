import numpy as np
import pytest

from rparallel import kernels

BACKENDS = ["numpy", "numba"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    kernels.get_backend(request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
