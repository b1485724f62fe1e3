# conftest.py

'''
Shared fixtures: the reference block-pendulum (chi=1, zeta1=0.2, zeta2=0.1, kappa=0.5, nu=1, R=0.25)
and small simulation schemes.
'''

from pathlib import Path

import numpy as np
import pytest

from stochstab.model import ScaledParams, SimScheme, blockEmbedding

REPO = Path(__file__).resolve().parent.parent

@pytest.fixture
def referenceParams ():
    return ScaledParams(zeta1=0.2, zeta2=0.1, chi=1.0, kappa=0.5, nu=1.0, rMass=0.25)

@pytest.fixture
def referenceModel (referenceParams):
    return blockEmbedding(referenceParams)

@pytest.fixture
def shortScheme ():
    return SimScheme(dt=1e-2, tFinal=20.0, burnIn=1.0, seed=123, nTraj=4)

@pytest.fixture
def rng ():
    return np.random.default_rng(20240917)

@pytest.fixture
def configDir ():
    return REPO / "config"
