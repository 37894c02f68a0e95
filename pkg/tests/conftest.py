import os

# keep test runs from writing log files under logs/
os.environ.setdefault("DENSITYMATCH_NO_LOGFILE", "1")

import numpy as np
import pytest

from app.densities import ScaledBeta
from app.models import example_model, synthetic_fan_model


@pytest.fixture
def leakage_pdf():
    """Beta(1.7, 3.2) on the linear example's uncertainty range."""
    return ScaledBeta(alpha=1.7, beta_shape=3.2, lower=0.1, upper=0.2)


@pytest.fixture
def example():
    return example_model()


@pytest.fixture
def fan():
    return synthetic_fan_model(n_design=4, seed=0)


@pytest.fixture
def fan_pdf(fan):
    return ScaledBeta(alpha=1.7, beta_shape=2.8, lower=fan.u_lower, upper=fan.u_upper)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
