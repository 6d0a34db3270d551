"""
Deterministic seed splitting.

Every random consumer (weight init, spike encoding, shuffling) derives its
own stream from the single experiment seed, so changing how much one
consumer draws never shifts another.
"""

import numpy as np

CONSUMERS = {
    "init": 1,
    "encode": 2,
    "shuffle": 3,
}


def derive_seed(root_seed: int, consumer: str, *keys: int) -> int:
    """32-bit seed for ``consumer``, further split by integer ``keys`` (epoch, sample index...)."""
    entropy = [int(root_seed), CONSUMERS[consumer]] + [int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def consumer_rng(root_seed: int, consumer: str, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root_seed, consumer, *keys))
