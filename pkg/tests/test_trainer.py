from dataclasses import replace

import numpy as np
import pytest

from snn.errors import DimensionError, TrainingDivergenceError
from compression.admm import AdmmState, ProximalPenalty
from compression.projections import prune_project
from snn.network import build_network, network_from_weights
from training.trainer import evaluate, sgd_step, train
from utils.datasets import synthetic_two_class


class NanPenalty:
    def value(self, net):
        return float("nan")

    def gradient(self, net):
        return [None] * net.num_layers


def test_sgd_step_example():
    net = network_from_weights("2-1", [np.array([[1.0, 2.0]])])
    updated = sgd_step(net, [np.array([[1.0, 1.0]])], 0.5)
    np.testing.assert_allclose(updated.weights[0], [[0.5, 1.5]])
    np.testing.assert_allclose(net.weights[0], [[1.0, 2.0]])


def test_sgd_step_mask_forces_exact_zeros():
    net = network_from_weights("2-1", [np.array([[1.0, 2.0]])])
    updated = sgd_step(net, [np.array([[1.0, 1.0]])], 0.5, mask=[np.array([[1.0, 0.0]])])
    np.testing.assert_array_equal(updated.weights[0], [[0.5, 0.0]])


def test_sgd_step_rejects_wrong_gradient_shape():
    net = network_from_weights("2-1", [np.array([[1.0, 2.0]])])
    with pytest.raises(DimensionError):
        sgd_step(net, [np.ones((2, 1))], 0.1)


def test_masked_training_keeps_zeros(tiny_net, synthetic_train, fast_config):
    mask = [None, (np.random.default_rng(0).random(tiny_net.weights[1].shape) < 0.5).astype(float), None]
    start = tiny_net.with_layer(1, values=tiny_net.weights[1] * mask[1])
    trained, _ = train(start, synthetic_train, fast_config, epochs=2, mask=mask)
    assert not trained.weights[1][mask[1] == 0].any()


def test_zero_epochs_leaves_network_unchanged(tiny_net, synthetic_train, fast_config):
    trained, history = train(tiny_net, synthetic_train, fast_config, epochs=0)
    for a, b in zip(trained.weights, tiny_net.weights):
        np.testing.assert_array_equal(a, b)
    assert history.rows == []


def test_training_is_deterministic(tiny_net, synthetic_train, fast_config):
    first, h1 = train(tiny_net, synthetic_train, fast_config, epochs=2)
    second, h2 = train(tiny_net, synthetic_train, fast_config, epochs=2)
    for a, b in zip(first.weights, second.weights):
        np.testing.assert_array_equal(a, b)
    assert h1.rows == h2.rows


def test_history_has_train_and_eval_rows(tiny_net, synthetic_train, synthetic_test, fast_config):
    _, history = train(tiny_net, synthetic_train, fast_config, epochs=2, eval_dataset=synthetic_test, stage="unit")
    assert [(r.epoch, r.split) for r in history.rows] == [(0, "train"), (0, "test"), (1, "train"), (1, "test")]
    assert all(r.stage == "unit" for r in history.rows)
    assert history.last("test").epoch == 1


def test_learns_synthetic_two_class(fast_config):
    config = replace(fast_config, timesteps=8)
    train_set = synthetic_two_class(200, rng_seed=10)
    test_set = synthetic_two_class(100, rng_seed=11, split="test")
    net = build_network("16-8-2", np.random.default_rng(0))
    trained, history = train(net, train_set, config, epochs=20)
    assert evaluate(trained, test_set, config).accuracy >= 0.95
    assert history.rows[-1].loss < history.rows[0].loss


def test_evaluation_is_deterministic(tiny_net, synthetic_test, fast_config):
    first = evaluate(tiny_net, synthetic_test, fast_config)
    second = evaluate(tiny_net, synthetic_test, fast_config)
    assert first.accuracy == second.accuracy
    assert first.loss == second.loss
    assert first.stats.avg_rate == second.stats.avg_rate


def test_non_finite_loss_raises_divergence(tiny_net, synthetic_train, fast_config):
    with pytest.raises(TrainingDivergenceError) as excinfo:
        train(tiny_net, synthetic_train, fast_config, NanPenalty(), epochs=1, stage="unit")
    assert excinfo.value.epoch == 0


def test_large_proximal_penalty_pulls_weights_onto_target(tiny_net, synthetic_train, fast_config):
    # lr * rho = 1: each step lands W on Z - g / rho
    config = replace(fast_config, learning_rate=0.01)
    target, _ = prune_project(tiny_net.weights[1], 0.5)
    state = AdmmState(1, tiny_net.weights[1].copy(), target, np.zeros_like(target), rho=100.0)

    def rms(net):
        return float(np.sqrt(np.mean((net.weights[1] - target) ** 2)))

    assert rms(tiny_net) > 1e-2
    trained, _ = train(tiny_net, synthetic_train, config, ProximalPenalty({1: state}), epochs=3)
    assert rms(trained) < 1e-2
