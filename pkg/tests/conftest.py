"""
This is a special file in Pytest that allows you to define fixtures that are available to all tests in your project,
without you having to import the fixture explicitly in your test files.
"""

import numpy as np
import pytest

from src.carfollow import IdmParams, OvmParams, RangePolicyParams
from src.dynamics import VehicleParams
from src.mpc import MpcConfig
from src.simkit import Scenario, generate_synthetic


@pytest.fixture
def vehicle():
    return VehicleParams()


@pytest.fixture
def policy():
    return RangePolicyParams()


@pytest.fixture
def idm():
    return IdmParams()


@pytest.fixture
def ovm(policy):
    return OvmParams(alpha=0.4, betas={1: 0.4728}, range=policy)


@pytest.fixture
def short_mpc():
    """Short-horizon predictive settings that keep unit tests fast."""
    return MpcConfig(T=20, K=20)


def constant_speed_scenario(n_vehicles=3, v=20.0, duration=20.0, dt=0.1, spacing=40.0):
    n = int(round(duration / dt)) + 1
    t = dt * np.arange(n)
    front = 1000.0 + v * t
    positions = np.column_stack([front - spacing * (n_vehicles - i) for i in range(1, n_vehicles + 1)])
    speeds = np.full((n, n_vehicles), v)
    return Scenario(dt=dt, positions=positions, speeds=speeds)


@pytest.fixture
def cruise_scenario():
    return constant_speed_scenario()


@pytest.fixture
def congested_scenario():
    return generate_synthetic("congested", seed=3, chain_len=4, duration=60.0)


@pytest.fixture
def step_scenario():
    return generate_synthetic("step", seed=1, chain_len=4, duration=60.0)
