import numpy as np
import pytest

from ccgen.models.config import RunConfig
from ccgen.operations.dgp_ops import sample_dgp_dataset
from ccgen.operations.selfcheck_ops import TINY_TOY


@pytest.fixture(scope="session")
def small_config() -> RunConfig:
    return RunConfig(n_samples=256)


@pytest.fixture(scope="session")
def three_mlp_draw(small_config):
    return sample_dgp_dataset(small_config, seed=5)


@pytest.fixture(scope="session")
def noiseless_draw():
    return sample_dgp_dataset(RunConfig(n_samples=256, outcome_noise_multiplier=0.0), seed=8)


@pytest.fixture
def tiny_config() -> RunConfig:
    return RunConfig(toy=TINY_TOY, n_samples=64, train_rows=16, bin_lo=-3.0, bin_hi=3.0, target_sigma=0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
