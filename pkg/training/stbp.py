"""
Spatio-temporal backpropagation (STBP) for the LIF network.

The loss is the squared distance between the one-hot label and the output
layer's firing rate over T steps, optionally plus λ times the average
hidden spike rate. Gradients are propagated backwards over timesteps and
layers with the boxcar standing in for the spike derivative:

    du^{t+1}/do^t = -decay * u^t        (reset path)
    du^{t+1}/du^t =  decay * (1 - o^t)
    do^t/du^t     =  surrogate_grad(u^t)

The adjoint beyond the last timestep is zero.
"""

from typing import Iterable, List, Optional, Tuple

import numpy as np

from snn.errors import DimensionError, RangeError
from snn.layers import DENSE, integrate_backward
from snn.lif import surrogate_grad
from snn.network import ForwardRecord, SpikeStats, SpikingNetwork, default_rate_scope, measure_spike_rate
from .train_config import TrainConfig

Gradients = List[np.ndarray]


def one_hot(index: int, num_classes: int) -> np.ndarray:
    """Label vector with a single 1 at ``index``."""
    if not 0 <= index < num_classes:
        raise RangeError(f"class index {index} outside [0, {num_classes})")
    label = np.zeros(num_classes)
    label[index] = 1.0
    return label


def _as_label_batch(label: np.ndarray, record: ForwardRecord) -> np.ndarray:
    label = np.asarray(label, dtype=float)
    if label.ndim == 1:
        label = label[None]
    classes = int(np.prod(record.o[-1].shape[2:]))
    if label.shape != (record.batch_size, classes):
        raise DimensionError(f"labels {label.shape} do not match output ({record.batch_size}, {classes})")
    return label


def rate_loss(record: ForwardRecord, label: np.ndarray, T: Optional[int] = None) -> float:
    """
    ||Y - (1/T) sum_t O^t||^2 for the output layer, averaged over the batch.

    Args:
        record: forward record
        label: one-hot labels, (classes,) or (batch, classes)
        T: timesteps; must match the record when given
    """
    if T is not None and T != record.timesteps:
        raise DimensionError(f"record covers {record.timesteps} timesteps, not {T}")
    label = _as_label_batch(label, record)
    diff = label - record.output_rates()
    return float(np.mean(np.sum(diff ** 2, axis=1)))


def predict_batch(record: ForwardRecord) -> np.ndarray:
    """Class with the highest average output rate per sample; ties go to the lowest index."""
    return np.argmax(record.output_rates(), axis=1)


def predict(record: ForwardRecord) -> int:
    """Predicted class of a single-sample record."""
    return int(predict_batch(record)[0])


def regularized_loss(normal_loss: float, stats: SpikeStats, lambda_: float) -> float:
    """L = L_normal + λ R, with R the average spike rate in ``stats``."""
    if lambda_ < 0:
        raise RangeError(f"lambda must be non-negative, got {lambda_}")
    return float(normal_loss + lambda_ * stats.avg_rate)


def batch_loss(record: ForwardRecord, label: np.ndarray, lambda_: float,
               scope: Optional[Iterable[int]] = None) -> Tuple[float, float, SpikeStats]:
    """(regularized loss, rate loss, spike statistics over ``scope``) for one batch."""
    normal = rate_loss(record, label)
    stats = measure_spike_rate(record, scope)
    return regularized_loss(normal, stats, lambda_), normal, stats


def _check_record(net: SpikingNetwork, record: ForwardRecord) -> None:
    if len(record.o) != net.num_layers or len(record.u) != net.num_layers:
        raise DimensionError(f"record has {len(record.o)} layers, network has {net.num_layers}")
    for n, layer in enumerate(net.layers):
        if record.o[n].shape[2:] != tuple(layer.weights.out_shape):
            raise DimensionError(f"layer {n}: record shape {record.o[n].shape[2:]} != {layer.weights.out_shape}")


def backward_pass(net: SpikingNetwork, record: ForwardRecord, label: np.ndarray, config: TrainConfig,
                  scope: Optional[Iterable[int]] = None) -> Gradients:
    """
    Weight gradients of the (regularised) rate loss, averaged over the batch.

    Args:
        net: network that produced ``record``
        record: forward record
        label: one-hot labels, (classes,) or (batch, classes)
        config: supplies T, λ and the neuron constants
        scope: layers the λR term covers (default: hidden layers)

    Returns:
        list of arrays shaped like each layer's weights
    """
    _check_record(net, record)
    label = _as_label_batch(label, record)
    params = config.lif
    T, B = record.timesteps, record.batch_size
    L = net.num_layers

    scope = set(default_rate_scope(L) if scope is None else scope)
    reg = 0.0
    if config.lambda_ > 0 and scope:
        neurons = sum(int(np.prod(net.layers[n].weights.out_shape)) for n in scope)
        reg = config.lambda_ / (neurons * T * B)

    out_shape = (B,) + tuple(net.layers[-1].weights.out_shape)
    direct = (-(2.0 / T) * (label - record.output_rates()) / B).reshape(out_shape)

    grads = [np.zeros_like(w) for w in net.weights]
    du_next = [np.zeros((B,) + tuple(layer.weights.out_shape)) for layer in net.layers]

    for t in reversed(range(T)):
        from_above = None
        for n in reversed(range(L)):
            weights = net.layers[n].weights
            u_t, o_t = record.u[n][t], record.o[n][t]

            do = np.zeros_like(u_t)
            if n == L - 1:
                do += direct
            if n in scope and reg:
                do += reg
            if from_above is not None:
                do += from_above
            do += du_next[n] * (-params.decay * u_t)

            du = do * surrogate_grad(u_t, params) + du_next[n] * params.decay * (1.0 - o_t)
            du_next[n] = du

            pre = record.o[n - 1][t] if n > 0 else record.input_spikes[t]
            pre_in = pre.reshape(B, -1) if weights.kind == DENSE else pre
            grad_w, grad_in = integrate_backward(weights, du.reshape((B,) + tuple(weights.out_shape)), pre_in)
            grads[n] += grad_w
            from_above = grad_in.reshape(pre.shape) if n > 0 else None

    return grads
