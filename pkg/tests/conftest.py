import numpy as np
import pytest

from cbfsafe import _kernels_numba, _kernels_numpy
from cbfsafe.barriers import BarrierSet
from cbfsafe.dynamics import SingleIntegrator2D
from cbfsafe.env import DEFAULT_OBSTACLES
from cbfsafe.safety_filter import ClassKLinear


@pytest.fixture
def system():
    return SingleIntegrator2D()


@pytest.fixture
def alpha():
    return ClassKLinear(5.0)


@pytest.fixture
def default_set():
    return BarrierSet.from_records(DEFAULT_OBSTACLES)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numpy", "numba"])
def kernels(request):
    return {"numpy": _kernels_numpy, "numba": _kernels_numba}[request.param]


def same_center_set(hvals, p=(2.0, 0.0)):
    """Barriers centred at the origin whose values at ``p`` are exactly ``hvals``."""
    d2 = p[0] ** 2 + p[1] ** 2
    return BarrierSet.from_records([{"center": [0.0, 0.0], "radius": float(np.sqrt(d2 - h))} for h in hvals])
