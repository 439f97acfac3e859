import math
import sys

import numpy as np
import pytest
from hypothesis import settings

from tophough import _accel

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def unit_disk_points(rng, n, radius=1.0):
    ang = rng.uniform(0.0, 2.0 * math.pi, n)
    rad = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    return np.c_[rad * np.cos(ang), rad * np.sin(ang)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"] if _accel.NUMBA_AVAILABLE else ["numpy"])
def backend(request):
    prev = _accel.backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(prev)


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is not None and acc.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acc.RESULTS):
            terminalreporter.write_line(line)
