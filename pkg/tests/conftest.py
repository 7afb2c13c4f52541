import numpy as np
import pytest

from uwisac.config import SystemConfig


@pytest.fixture
def cfg():
    return SystemConfig.from_dict()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
