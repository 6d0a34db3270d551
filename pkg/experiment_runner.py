"""
Experiment pipeline: load data, pretrain, compress, evaluate and report.

Outputs go to ``config.out_dir``:
    pretrained.ckpt   network after pretraining
    model.ckpt        network after compression
    history.csv       per-epoch training (and evaluation) rows
    admm_diag.csv     per-epoch, per-layer ADMM diagnostics
    report.csv        the compression report row (one row per grid entry)
    layers.csv        pruned connections and distinct weight values per layer
    grid_NN/         per-entry outputs of a grid run
"""

import os
from dataclasses import replace
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np

from compression.admm import CompressionResult, DiagRow, admm_joint, admm_prune, admm_quantize, hard_compress
from compression.metrics import CompressionReport, layer_statistics
from logger_utils import logger, log_decorator, log_operation
from snn.errors import ConfigError, SnnError, StageError
from snn.network import SpikingNetwork, build_network, compressible_layers
from src.checkpoint import Checkpoint, CheckpointManager, load_checkpoint
from training.trainer import EvalResult, TrainHistory, evaluate, train
from utils.config import ExperimentConfig
from utils.csv_writers import write_diagnostics, write_history, write_layer_stats, write_report
from utils.datasets import Dataset, synthetic_two_class
from utils.idx_loader import load_mnist
from utils.seeding import consumer_rng, derive_seed

T = TypeVar("T")

PRETRAINED = "pretrained"
COMPRESSED = "model"

# synthetic splits draw from the "init" stream under their own keys
SYNTHETIC_KEYS = {"train": 101, "test": 102}


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig, data: Optional[Tuple[Dataset, Dataset]] = None):
        self.config = config.validate()
        self.out_dir = config.out_dir
        self.checkpoints = CheckpointManager(self.out_dir)
        self.history = TrainHistory()
        self.diagnostics: List[DiagRow] = []
        self._data = data

    # ------------------------------------------------------------ helpers

    def _stage(self, name: str, fn: Callable[..., T], *args, **kwargs) -> T:
        """Run one stage; toolkit errors are logged and re-raised with the stage label."""
        try:
            return fn(*args, **kwargs)
        except StageError:
            raise
        except (SnnError, OSError) as e:
            log_operation(f"stage_{name}", {"out_dir": self.out_dir}, error=e)
            raise StageError(name, e) from e

    def _path(self, filename: str) -> str:
        return os.path.join(self.out_dir, filename)

    def data(self) -> Tuple[Dataset, Dataset]:
        if self._data is None:
            self._data = self._stage("load_data", self._load_data)
        return self._data

    def _load_data(self) -> Tuple[Dataset, Dataset]:
        cfg = self.config
        if cfg.dataset == "synthetic":
            train_set = synthetic_two_class(cfg.synthetic_size, derive_seed(cfg.seed, "init", SYNTHETIC_KEYS["train"]))
            test_set = synthetic_two_class(cfg.synthetic_size, derive_seed(cfg.seed, "init", SYNTHETIC_KEYS["test"]),
                                           split="test")
        else:
            train_set = load_mnist(cfg.data_dir, "train")
            test_set = load_mnist(cfg.data_dir, "test")
        train_set, test_set = train_set.subset(cfg.train_limit), test_set.subset(cfg.test_limit)
        logger.info(f"Loaded {cfg.dataset}: {len(train_set)} train / {len(test_set)} test samples")
        return train_set, test_set

    def _check_input(self, net: SpikingNetwork, dataset: Dataset) -> None:
        if int(np.prod(net.input_shape)) != int(np.prod(dataset.image_shape)):
            raise ConfigError([
                f"architecture '{net.architecture}' expects input {net.input_shape}, "
                f"dataset images are {dataset.image_shape}"
            ])
        if net.num_classes != dataset.num_classes:
            raise ConfigError([
                f"architecture '{net.architecture}' has {net.num_classes} outputs, "
                f"dataset has {dataset.num_classes} classes"
            ])

    # ------------------------------------------------------------ stages

    def pretrain(self) -> SpikingNetwork:
        train_set, test_set = self.data()
        cfg = self.config
        net = build_network(cfg.arch, consumer_rng(cfg.seed, "init"))
        self._check_input(net, train_set)
        logger.info(f"Pretraining {cfg.arch} for {cfg.epochs_pretrain} epochs")
        net, history = self._stage("pretrain", train, net, train_set, cfg.train_config(),
                                   epochs=cfg.epochs_pretrain, eval_dataset=test_set, stage="pretrain")
        self.history.extend(history)
        self.checkpoints.save(PRETRAINED, Checkpoint.from_network(net, cfg.epochs_pretrain, cfg.seed))
        write_history(self._path("history.csv"), self.history.rows)
        return net

    def compress(self, net: SpikingNetwork, start_epoch: int = 0) -> SpikingNetwork:
        """Apply the configured compression mode to a pretrained network."""
        train_set, test_set = self.data()
        self._check_input(net, train_set)
        cfg = self.config
        spec = cfg.compression_spec()
        train_cfg = cfg.train_config(lambda_=spec.lambda_)
        layers = compressible_layers(net.num_layers, cfg.compress_edge_layers)
        common = dict(layers=layers, eval_dataset=test_set, start_epoch=start_epoch)

        if cfg.mode == "none":
            logger.info("Mode 'none': network left uncompressed")
            result = CompressionResult(net=net, next_epoch=start_epoch)
        elif cfg.wants_prune or cfg.wants_quantize:
            if cfg.method == "hard":
                result = self._stage("compress", hard_compress, net, train_set, spec, train_cfg, **common)
            elif spec.sparsity is not None and spec.quant is not None:
                result = self._stage("compress", admm_joint, net, train_set, spec.sparsity, spec.quant, train_cfg,
                                     rho=spec.rho, **common)
            elif spec.sparsity is not None:
                result = self._stage("compress", admm_prune, net, train_set, spec.sparsity, train_cfg,
                                     rho=spec.rho, **common)
            else:
                result = self._stage("compress", admm_quantize, net, train_set, spec.quant, train_cfg,
                                     rho=spec.rho, **common)
        else:
            epochs = cfg.epochs_admm + cfg.epochs_hard
            logger.info(f"Activity-regularized retraining with lambda={spec.lambda_} for {epochs} epochs")
            trained, history = self._stage("compress", train, net, train_set, train_cfg, epochs=epochs,
                                           eval_dataset=test_set, stage="regularize", epoch_offset=start_epoch)
            result = CompressionResult(net=trained, history=history, next_epoch=start_epoch + epochs)

        self.history.extend(result.history)
        self.diagnostics.extend(result.diagnostics)
        self.checkpoints.save(COMPRESSED, Checkpoint.from_network(result.net, result.next_epoch, cfg.seed))
        write_history(self._path("history.csv"), self.history.rows)
        write_diagnostics(self._path("admm_diag.csv"), self.diagnostics)
        return result.net

    def evaluate(self, net: SpikingNetwork) -> EvalResult:
        _, test_set = self.data()
        self._check_input(net, test_set)
        result = self._stage("evaluate", evaluate, net, test_set, self.config.train_config())
        logger.info(f"Test accuracy {result.accuracy:.4f}, hidden spike rate {result.stats.avg_rate:.5f}")
        return result

    def _compare(self, before: EvalResult, after: EvalResult) -> CompressionReport:
        cfg = self.config
        spec = cfg.compression_spec()
        report = self._stage(
            "report",
            CompressionReport.build,
            lambda_=spec.lambda_,
            sparsity=spec.sparsity or 0.0,
            bitwidth=spec.bitwidth or cfg.baseline_bitwidth,
            baseline_bitwidth=cfg.baseline_bitwidth,
            baseline_rate=before.stats.avg_rate,
            compressed_rate=after.stats.avg_rate,
            accuracy=after.accuracy,
            baseline_accuracy=before.accuracy,
        )
        logger.info(
            f"R_mem={report.r_mem:.4%} R_s={report.r_s:.4f} R_ops={report.r_ops:.4%} "
            f"accuracy {report.accuracy:.4f} (baseline {report.baseline_accuracy:.4f})"
        )
        return report

    def _write_layers(self, baseline: SpikingNetwork, compressed: SpikingNetwork) -> None:
        stats = layer_statistics(baseline, "baseline") + layer_statistics(compressed, "compressed")
        write_layer_stats(self._path("layers.csv"), stats)

    def report(self, baseline: SpikingNetwork, compressed: SpikingNetwork) -> CompressionReport:
        """Evaluate both networks on the test split and write report.csv and layers.csv."""
        report = self._compare(self.evaluate(baseline), self.evaluate(compressed))
        write_report(self._path("report.csv"), [report])
        self._write_layers(baseline, compressed)
        return report

    def stored(self, name: str, path: Optional[str] = None) -> Checkpoint:
        """Checkpoint at ``path``, or the one named ``name`` in the run directory."""
        checkpoint = self._stage("load_checkpoint", load_checkpoint, path) if path else self.checkpoints.load(name)
        if checkpoint is None:
            raise ConfigError([f"no checkpoint given and '{self.checkpoints.path(name)}' does not exist"])
        return checkpoint

    def baseline(self) -> Tuple[SpikingNetwork, int]:
        """The configured ``checkpoint`` if any, otherwise a freshly pretrained network."""
        if self.config.checkpoint:
            checkpoint = self.stored(PRETRAINED, self.config.checkpoint)
            return checkpoint.to_network(), checkpoint.epoch
        return self.pretrain(), self.config.epochs_pretrain

    def run(self) -> CompressionReport:
        """Full pipeline. A configured ``checkpoint`` replaces pretraining."""
        baseline, start = self.baseline()
        compressed = self.compress(baseline, start_epoch=start)
        return self.report(baseline, compressed)

    def run_grid(self) -> List[CompressionReport]:
        """
        Compress one baseline under every ``grid`` entry and write all rows
        to report.csv. Each entry keeps its own outputs in ``grid_NN/``.
        """
        entries = self.config.grid_configs()
        if not entries:
            raise ConfigError(["grid run needs a non-empty 'grid' setting"])
        baseline, start = self.baseline()
        before = self.evaluate(baseline)
        reports = []
        for k, entry in enumerate(entries):
            logger.info(f"Grid entry {k + 1}/{len(entries)}: mode={entry.mode} s={entry.sparsity} "
                        f"b={entry.bitwidth} lambda={entry.lambda_}")
            runner = ExperimentRunner(replace(entry, out_dir=self._path(f"grid_{k:02d}")), data=self.data())
            compressed = runner.compress(baseline, start_epoch=start)
            report = runner._compare(before, runner.evaluate(compressed))
            write_report(runner._path("report.csv"), [report])
            runner._write_layers(baseline, compressed)
            reports.append(report)
        write_report(self._path("report.csv"), reports)
        return reports


@log_decorator("run_experiment")
def run_experiment(config: ExperimentConfig) -> CompressionReport:
    """
    Pretrain (or load), compress per ``config.mode`` and report.

    Args:
        config: validated experiment configuration

    Returns:
        CompressionReport: the measured compression against the run's own baseline
    """
    return ExperimentRunner(config).run()


@log_decorator("run_grid")
def run_grid(config: ExperimentConfig) -> List[CompressionReport]:
    """Pretrain (or load) once, then compress and report every ``config.grid`` entry."""
    return ExperimentRunner(config).run_grid()
