"""
Test configuration and fixtures.
"""

import factory.random
import pytest
from fastapi.testclient import TestClient

from qetlab.hamiltonian import ModelParams
from qetlab.main import app
from qetlab.noise import NoiseParams


@pytest.fixture(autouse=True)
def seeded_factories():
    """Make factory draws repeatable from test to test."""
    factory.random.reseed_random("qetlab")


@pytest.fixture
def reference_params():
    """The reference point h_A = 1, h_B = 0.4, kappa = 0.2."""
    return ModelParams(h_a=1.0, h_b=0.4, kappa=0.2)


@pytest.fixture
def uncoupled_params():
    """kappa = 0: ground state |00>, nothing to extract."""
    return ModelParams(h_a=1.0, h_b=0.4, kappa=0.0)


@pytest.fixture
def default_noise():
    """Default relaxation times and gate durations."""
    return NoiseParams()


@pytest.fixture
def noiseless():
    """Relaxation times long enough to be invisible."""
    return NoiseParams.uniform(1e9, 1e9)


@pytest.fixture(scope="function")
def client():
    """Create a test client for the JSON API."""
    with TestClient(app) as test_client:
        yield test_client
