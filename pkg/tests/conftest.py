import numpy as np
import pytest
from scipy.special import erf

from swarmlimits import PotentialSpec


def truncated_gaussian(a=-4.0, b=4.0):
    mass = 0.5 * (erf(b / np.sqrt(2)) - erf(a / np.sqrt(2)))
    return lambda x: np.exp(-0.5 * np.asarray(x) ** 2) / (np.sqrt(2 * np.pi) * mass)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def smooth_spec():
    return PotentialSpec(interaction="gaussian", communication="bump", radius=1.0, kappa=1.0)
