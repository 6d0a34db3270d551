import os
from dataclasses import replace

import pytest

from experiment_runner import run_experiment
from snn.network import build_network
from training.trainer import evaluate, train
from utils.config import ExperimentConfig
from utils.idx_loader import load_mnist
from utils.seeding import consumer_rng

MNIST_DIR = os.getenv("SNN_MNIST_DIR")

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(not MNIST_DIR, reason="SNN_MNIST_DIR not set"),
]


def test_small_mnist_run_prunes_and_quantizes(tmp_path):
    config = ExperimentConfig(
        arch="784-100-10",
        dataset="mnist",
        data_dir=MNIST_DIR,
        train_limit=2000,
        test_limit=500,
        epochs_pretrain=3,
        epochs_admm=1,
        epochs_hard=1,
        mode="all",
        sparsity=0.25,
        bitwidth=1,
        lambda_=0.01,
        seed=0,
        out_dir=str(tmp_path),
    )
    report = run_experiment(config)
    assert report.to_row()["r_mem_pct"] == 2.34
    assert report.to_row()["r_mem_x"] == 42.74
    assert report.accuracy > 0.3


def test_activity_regularization_lowers_spike_rate():
    train_set = load_mnist(MNIST_DIR, "train").subset(10000)
    test_set = load_mnist(MNIST_DIR, "test").subset(2000)
    config = ExperimentConfig(arch="784-400-10", seed=0).train_config()
    net = build_network("784-400-10", consumer_rng(0, "init"))
    pretrained, _ = train(net, train_set, config, epochs=5)

    plain, _ = train(pretrained, train_set, config, epochs=5, epoch_offset=5)
    sparse, _ = train(pretrained, train_set, replace(config, lambda_=0.1), epochs=5, epoch_offset=5)
    before = evaluate(plain, test_set, config)
    after = evaluate(sparse, test_set, config)

    assert after.stats.avg_rate <= 0.6 * before.stats.avg_rate
    assert before.accuracy - after.accuracy <= 0.02
