import numpy as np
import pytest

from rfsense.model import SystemParams, Topology

TOPOLOGIES = list(Topology)


@pytest.fixture
def base():
    return SystemParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
