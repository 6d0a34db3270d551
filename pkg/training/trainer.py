"""
Mini-batch SGD training and evaluation loops for spiking networks.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol, Sequence

import numpy as np

from logger_utils import logger, log_decorator
from snn.encoding import encode_batch
from snn.errors import DimensionError, RangeError, TrainingDivergenceError
from snn.network import SpikeStats, SpikingNetwork, default_rate_scope, forward_pass
from utils.datasets import Dataset, batches
from utils.seeding import derive_seed
from .stbp import Gradients, backward_pass, batch_loss, predict_batch
from .train_config import TrainConfig

SPLIT_KEYS = {"train": 0, "test": 1}


class LossAugmentation(Protocol):
    """Extra differentiable loss term, e.g. the ADMM proximal penalty."""

    def value(self, net: SpikingNetwork) -> float:
        ...

    def gradient(self, net: SpikingNetwork) -> Sequence[Optional[np.ndarray]]:
        ...


Projector = Callable[[SpikingNetwork], SpikingNetwork]


@dataclass(frozen=True)
class HistoryRow:
    epoch: int
    split: str
    loss: float
    accuracy: float
    avg_spike_rate: float
    stage: str = ""


@dataclass
class TrainHistory:
    rows: List[HistoryRow] = field(default_factory=list)

    def add(self, row: HistoryRow) -> None:
        self.rows.append(row)

    def extend(self, other: "TrainHistory") -> None:
        self.rows.extend(other.rows)

    def last(self, split: str = "train") -> Optional[HistoryRow]:
        matching = [r for r in self.rows if r.split == split]
        return matching[-1] if matching else None

    def describe(self) -> dict:
        return {"epochs": len(self.rows)}


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    loss: float
    stats: SpikeStats

    def describe(self) -> dict:
        return {"accuracy": self.accuracy, "loss": self.loss, "avg_spike_rate": self.stats.avg_rate}


def encoding_seeds(config: TrainConfig, split: str, epoch_key: int, indices: np.ndarray) -> List[int]:
    return [derive_seed(config.rng_seed, "encode", SPLIT_KEYS[split], epoch_key, int(i)) for i in indices]


def sgd_step(net: SpikingNetwork, grads: Gradients, learning_rate: float,
             mask: Optional[Sequence[Optional[np.ndarray]]] = None) -> SpikingNetwork:
    """
    w <- w - learning_rate * g for every layer.

    Args:
        net: current network
        grads: one gradient per layer
        learning_rate: step size
        mask: optional per-layer binary masks (None entries leave a layer
            unmasked); zeros in a mask stay exactly zero

    Returns:
        SpikingNetwork: the updated network
    """
    if len(grads) != net.num_layers:
        raise DimensionError(f"{len(grads)} gradients for {net.num_layers} layers")
    masks = list(mask) if mask is not None else [None] * net.num_layers
    updated = []
    for n, (w, g) in enumerate(zip(net.weights, grads)):
        if g.shape != w.shape:
            raise DimensionError(f"layer {n}: gradient {g.shape} does not match weights {w.shape}")
        new_w = w - learning_rate * g
        if masks[n] is not None:
            new_w = np.where(np.asarray(masks[n], dtype=bool), new_w, 0.0)
        updated.append(new_w)
    return net.with_weights(updated)


def evaluate(net: SpikingNetwork, dataset: Dataset, config: TrainConfig,
             batch_size: Optional[int] = None) -> EvalResult:
    """
    Accuracy, mean rate loss and hidden-layer spike statistics over a split.

    Encoding seeds depend only on the sample index, so repeated evaluations
    of the same network agree exactly.
    """
    if len(dataset) == 0:
        raise RangeError("cannot evaluate on an empty dataset")
    scope = default_rate_scope(net.num_layers)
    stats = SpikeStats.empty(len(scope))
    loss_sum, correct = 0.0, 0
    for batch in batches(dataset, batch_size or config.batch_size):
        spikes = encode_batch(batch.images, config.timesteps, encoding_seeds(config, dataset.split, 0, batch.indices))
        record = forward_pass(net, spikes, config.lif)
        _, normal, batch_stats = batch_loss(record, dataset.one_hot(batch.labels), 0.0, scope)
        loss_sum += normal * len(batch)
        correct += int(np.sum(predict_batch(record) == batch.labels))
        stats = stats.merge(batch_stats)
    return EvalResult(accuracy=correct / len(dataset), loss=loss_sum / len(dataset), stats=stats)


@log_decorator("train")
def train(net: SpikingNetwork, dataset: Dataset, config: TrainConfig,
          loss_augmentation: Optional[LossAugmentation] = None, *,
          epochs: Optional[int] = None,
          mask: Optional[Sequence[Optional[np.ndarray]]] = None,
          projector: Optional[Projector] = None,
          eval_dataset: Optional[Dataset] = None,
          stage: str = "pretrain",
          epoch_offset: int = 0):
    """
    Mini-batch SGD with STBP gradients.

    Args:
        net: starting network
        dataset: training split
        config: hyper-parameters; ``epochs`` defaults to ``config.epochs_pretrain``
        loss_augmentation: optional extra loss term added to every batch
        epochs: number of epochs to run
        mask: per-layer masks restricting which weights may change
        projector: applied to the network after every update
        eval_dataset: when given, evaluated after every epoch
        stage: label written into the history
        epoch_offset: global epoch number of the first epoch (drives shuffling)

    Returns:
        tuple: (trained network, TrainHistory)
    """
    if len(dataset) == 0:
        raise RangeError("training dataset is empty")
    epochs = config.epochs_pretrain if epochs is None else epochs
    history = TrainHistory()
    scope = default_rate_scope(net.num_layers)
    shuffle_seed = derive_seed(config.rng_seed, "shuffle")

    for local_epoch in range(epochs):
        epoch = epoch_offset + local_epoch
        loss_sum, correct = 0.0, 0
        stats = SpikeStats.empty(len(scope))

        for batch in batches(dataset, config.batch_size, shuffle_seed, epoch):
            spikes = encode_batch(batch.images, config.timesteps,
                                  encoding_seeds(config, dataset.split, epoch + 1, batch.indices))
            record = forward_pass(net, spikes, config.lif)
            labels = dataset.one_hot(batch.labels)
            total, _, batch_stats = batch_loss(record, labels, config.lambda_, scope)
            grads = backward_pass(net, record, labels, config, scope)

            if loss_augmentation is not None:
                total += loss_augmentation.value(net)
                extra = loss_augmentation.gradient(net)
                grads = [g if e is None else g + e for g, e in zip(grads, extra)]

            if not math.isfinite(total) or not all(np.all(np.isfinite(g)) for g in grads):
                logger.error(f"[{stage}] non-finite loss at epoch {epoch}")
                raise TrainingDivergenceError(epoch, total)

            net = sgd_step(net, grads, config.learning_rate, mask)
            if projector is not None:
                net = projector(net)

            loss_sum += total * len(batch)
            correct += int(np.sum(predict_batch(record) == batch.labels))
            stats = stats.merge(batch_stats)
            logger.debug(f"[{stage}] epoch {epoch} batch of {len(batch)}: loss={total:.5f}")

        row = HistoryRow(epoch, "train", loss_sum / len(dataset), correct / len(dataset), stats.avg_rate, stage)
        history.add(row)
        message = (f"[{stage}] epoch {epoch}: loss={row.loss:.4f} acc={row.accuracy:.4f} "
                   f"rate={row.avg_spike_rate:.4f}")

        if eval_dataset is not None:
            result = evaluate(net, eval_dataset, config)
            history.add(HistoryRow(epoch, eval_dataset.split, result.loss, result.accuracy,
                                   result.stats.avg_rate, stage))
            message += f" | {eval_dataset.split} acc={result.accuracy:.4f} rate={result.stats.avg_rate:.4f}"
        logger.info(message)

    return net, history
