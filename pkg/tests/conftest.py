"""
    Shared fixtures for the platoon_intel tests.

    Read more about conftest.py under:
    - https://docs.pytest.org/en/stable/fixture.html
"""

import numpy as np
import pytest

from platoon.intel.auction import Distribution, MonotonicNet, ValuationSampler
from platoon.intel.config import CoverageConfig, EnergyConfig
from platoon.intel.envs import CoverageEnv, EnergyEnv

USERS = [[0, 0], [1, 1], [4, 4], [3, 3], [0, 4], [4, 0], [2, 2], [1, 3]]


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture()
def uniform2() -> ValuationSampler:
    return ValuationSampler.iid(Distribution.uniform(), 2, seed=7)


@pytest.fixture()
def preset2() -> MonotonicNet:
    return MonotonicNet.uniform_preset(2)


@pytest.fixture()
def coverage_config() -> CoverageConfig:
    return CoverageConfig.from_dict(
        {"W": 5, "H": 5, "agents": 2, "radius": 1, "horizon": 3,
         "users": USERS, "start": [[0, 0], [4, 4]]}
    )


@pytest.fixture()
def coverage(coverage_config) -> CoverageEnv:
    return CoverageEnv(coverage_config)


@pytest.fixture()
def energy() -> EnergyEnv:
    return EnergyEnv(EnergyConfig(agents=3, demand_seed=3))
