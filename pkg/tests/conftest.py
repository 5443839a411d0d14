from pathlib import Path

import pytest

from chartcov.refmodels import builtin_model
from chartcov.scdsl import load_model
from chartcov.simgen import SimParams, simulate_batch

MODEL_PATH = Path(__file__).resolve().parent.parent / 'assets' / 'intersection.scd'

BATCH_SIZE = 10_000
BATCH_SEED = 20240611


@pytest.fixture(scope='session')
def model():
    return builtin_model()


@pytest.fixture(scope='session')
def model_path():
    return MODEL_PATH


@pytest.fixture(scope='session')
def reference_model():
    return load_model(MODEL_PATH)


@pytest.fixture(scope='session')
def default_batch(model):
    """10,000 scenarios with default parameters."""
    return simulate_batch(model, SimParams(n_scenarios=BATCH_SIZE, seed=BATCH_SEED))
