import numpy as np
import pytest

from tsgp import catalog
from tsgp.model import FitConfig, fit


@pytest.fixture(scope="session")
def synthetic_models():
    return catalog.benchmark_models()


@pytest.fixture(scope="session")
def tension_data():
    return catalog.ground_truth(catalog.DeformationPath.tension())


@pytest.fixture(scope="session")
def fitted(tension_data):
    return fit(tension_data, FitConfig(cutoff=1.25))


def random_spd(rng, scale=0.3):
    """Random symmetric positive-definite C = F^T F near the identity."""
    F = np.eye(3) + scale * rng.uniform(-1, 1, (3, 3))
    while np.linalg.det(F) <= 0.1:
        F = np.eye(3) + scale * rng.uniform(-1, 1, (3, 3))
    return F.T @ F
