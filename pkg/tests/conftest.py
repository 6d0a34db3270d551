import numpy as np
import pytest

from snn.lif import LifParams
from snn.network import build_network
from training.train_config import TrainConfig
from utils.datasets import synthetic_two_class


@pytest.fixture
def params():
    return LifParams()


@pytest.fixture
def tiny_net():
    return build_network("16-12-8-2", np.random.default_rng(0))


@pytest.fixture
def synthetic_train():
    return synthetic_two_class(60, rng_seed=1)


@pytest.fixture
def synthetic_test():
    return synthetic_two_class(40, rng_seed=2, split="test")


@pytest.fixture
def fast_config():
    return TrainConfig(
        timesteps=4,
        epochs_pretrain=2,
        epochs_admm=2,
        epochs_hard=2,
        batch_size=20,
        learning_rate=0.1,
        rng_seed=0,
    )


@pytest.fixture
def dyadic():
    """Random weights on a 1/denominator grid in [-1, 1]; sums of these are exact in float64."""
    def draw(rng, shape, denominator=16):
        return rng.integers(-denominator, denominator + 1, size=shape) / denominator
    return draw
