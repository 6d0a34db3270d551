"""
Spiking network container, forward simulation and spike statistics.

A network is an ordered list of synaptic layers; each layer feeds one LIF
population. Simulation sweeps layers in depth order inside every timestep,
so layer n+1 at time t sees the spikes layer n emitted at the same t.
"""

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, EmptyScopeError
from .layers import DENSE, LayerWeights, integrate
from .lif import LifParams, NeuronState, lif_step

_CONV_TOKEN = re.compile(r"^(\d+)[Cc](\d+)[Ss](\d+)$")
_INPUT_TOKEN = re.compile(r"^\d+(x\d+){0,2}$")


@dataclass(frozen=True)
class Layer:
    """Synaptic weights plus the compression state attached to them."""
    weights: LayerWeights
    mask: Optional[np.ndarray] = None
    alpha: Optional[float] = None

    @property
    def values(self) -> np.ndarray:
        return self.weights.values


@dataclass(frozen=True)
class SpikingNetwork:
    architecture: str
    input_shape: Tuple[int, ...]
    layers: Tuple[Layer, ...]

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def weights(self) -> List[np.ndarray]:
        return [layer.values for layer in self.layers]

    @property
    def num_classes(self) -> int:
        return int(np.prod(self.layers[-1].weights.out_shape))

    def describe(self) -> dict:
        return {
            "architecture": self.architecture,
            "layers": [f"{l.weights.kind}{tuple(l.values.shape)}" for l in self.layers],
            "masked": [l.mask is not None for l in self.layers],
        }

    def with_weights(self, values: Sequence[np.ndarray]) -> "SpikingNetwork":
        """New network with replaced weight tensors; masks and scales are kept."""
        if len(values) != self.num_layers:
            raise DimensionError(f"expected {self.num_layers} weight tensors, got {len(values)}")
        layers = tuple(
            replace(layer, weights=layer.weights.with_values(v))
            for layer, v in zip(self.layers, values)
        )
        return replace(self, layers=layers)

    def with_layer(self, index: int, **changes) -> "SpikingNetwork":
        layers = list(self.layers)
        if "values" in changes:
            changes["weights"] = layers[index].weights.with_values(changes.pop("values"))
        layers[index] = replace(layers[index], **changes)
        return replace(self, layers=tuple(layers))

    def copy(self) -> "SpikingNetwork":
        return self.with_weights([v.copy() for v in self.weights])


def parse_input_token(token: str) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in token.split("x"))
    if len(dims) == 2:
        return (1,) + dims
    return dims


def build_network(architecture: str, rng: np.random.Generator) -> SpikingNetwork:
    """
    Build a randomly initialised network from a descriptor string.

    "784-400-10" is a dense MLP. Convolutions use ``<out>C<k>S<stride>``
    after an input token ``CxHxW`` or ``HxW``, e.g. "1x28x28-8C5S2-16C3S2-10".
    Weights are uniform in [-k, k] with k = sqrt(3 / fan_in).
    """
    tokens = [t.strip() for t in architecture.split("-") if t.strip()]
    if len(tokens) < 2 or not _INPUT_TOKEN.match(tokens[0]):
        raise ValueError(f"Cannot parse architecture '{architecture}'")

    input_shape = parse_input_token(tokens[0])
    shape = input_shape
    layers = []
    for token in tokens[1:]:
        conv = _CONV_TOKEN.match(token)
        if conv:
            if len(shape) != 3:
                raise ValueError(f"Convolution '{token}' must follow a spatial input in '{architecture}'")
            out_ch, k, stride = (int(g) for g in conv.groups())
            fan_in = shape[0] * k * k
            bound = np.sqrt(3.0 / fan_in)
            values = rng.uniform(-bound, bound, size=(out_ch, shape[0], k, k))
            weights = LayerWeights.conv2d(values, shape, stride)
        elif token.isdigit():
            fan_in = int(np.prod(shape))
            bound = np.sqrt(3.0 / fan_in)
            weights = LayerWeights.dense(rng.uniform(-bound, bound, size=(int(token), fan_in)))
        else:
            raise ValueError(f"Unknown layer token '{token}' in '{architecture}'")
        layers.append(Layer(weights=weights))
        shape = weights.out_shape

    if len(shape) != 1:
        raise ValueError(f"Architecture '{architecture}' must end with a dense output layer")
    return SpikingNetwork(architecture=architecture, input_shape=input_shape, layers=tuple(layers))


def network_from_weights(architecture: str, values: Sequence[np.ndarray]) -> SpikingNetwork:
    """Rebuild a network of ``architecture`` around known weight tensors."""
    template = build_network(architecture, np.random.default_rng(0))
    return template.with_weights([np.asarray(v, dtype=float) for v in values])


def default_rate_scope(num_layers: int) -> range:
    """
    Layers whose spikes count towards R and r: every hidden population,
    i.e. all but the output layer. A single-layer network has no hidden
    population, so its output layer is used.
    """
    return range(num_layers - 1) if num_layers > 1 else range(num_layers)


def compressible_layers(num_layers: int, include_edges: bool = False) -> List[int]:
    """Indices of layers that compression touches; first and last are spared when there are at least three."""
    if include_edges or num_layers < 3:
        return list(range(num_layers))
    return list(range(1, num_layers - 1))


@dataclass
class ForwardRecord:
    """
    Everything the backward pass needs.

    ``input_spikes`` is (T, batch, *input_shape); ``u[n]`` and ``o[n]`` are
    (T, batch, *out_shape) for layer n.
    """
    input_spikes: np.ndarray
    u: List[np.ndarray] = field(default_factory=list)
    o: List[np.ndarray] = field(default_factory=list)

    @property
    def timesteps(self) -> int:
        return int(self.input_spikes.shape[0])

    @property
    def batch_size(self) -> int:
        return int(self.input_spikes.shape[1])

    def output_rates(self) -> np.ndarray:
        """Average firing rate per output neuron, shape (batch, classes)."""
        out = self.o[-1]
        return out.reshape(out.shape[0], out.shape[1], -1).mean(axis=0)


def _presynaptic(weights: LayerWeights, spikes: np.ndarray) -> np.ndarray:
    # dense layers after a convolution see the flattened map
    if weights.kind == DENSE:
        return spikes.reshape(spikes.shape[0], -1)
    return spikes


def forward_pass(net: SpikingNetwork, input_spikes: np.ndarray, params: LifParams) -> ForwardRecord:
    """
    Simulate ``net`` on an input spike train.

    Args:
        net: the network
        input_spikes: (T, *input_shape) or (T, batch, ...) where each sample
            holds prod(input_shape) values, e.g. (T, batch, H, W) images
            for a flat "784-..." architecture
        params: neuron constants

    Returns:
        ForwardRecord: all potentials and spikes, every layer and timestep
    """
    input_spikes = np.asarray(input_spikes, dtype=float)
    size = int(np.prod(net.input_shape))
    shape = input_spikes.shape
    # images of any layout are accepted as long as the element count matches
    if len(shape) >= 3 and int(np.prod(shape[2:])) == size:
        batched = shape[:2]
    elif len(shape) >= 2 and int(np.prod(shape[1:])) == size:
        batched = (shape[0], 1)
    else:
        raise DimensionError(f"input spikes {shape} do not match input shape {net.input_shape}")
    input_spikes = input_spikes.reshape(batched + tuple(net.input_shape))

    timesteps, batch = input_spikes.shape[:2]
    record = ForwardRecord(input_spikes=input_spikes)
    states = []
    for layer in net.layers:
        shape = (timesteps, batch) + tuple(layer.weights.out_shape)
        record.u.append(np.zeros(shape))
        record.o.append(np.zeros(shape))
        states.append(NeuronState.zeros((batch,) + tuple(layer.weights.out_shape)))

    for t in range(timesteps):
        spikes = input_spikes[t]
        for n, layer in enumerate(net.layers):
            drive = integrate(layer.weights, _presynaptic(layer.weights, spikes))
            states[n] = lif_step(states[n], drive.reshape(states[n].u.shape), params)
            record.u[n][t] = states[n].u
            record.o[n][t] = states[n].o
            spikes = states[n].o
    return record


@dataclass(frozen=True)
class SpikeStats:
    """
    Average spikes per neuron per timestep over a set of layers.

    ``slots`` is neurons x timesteps x samples for the scope; the
    per-layer arrays allow exact merging across batches. Counts are floats
    so relaxed (ramp) outputs are summed the same way as binary spikes.
    """
    avg_rate: float
    per_layer_rate: np.ndarray
    total_spikes: float
    slots: int
    per_layer_spikes: np.ndarray
    per_layer_slots: np.ndarray

    @classmethod
    def empty(cls, num_scope_layers: int) -> "SpikeStats":
        zeros = np.zeros(num_scope_layers)
        return cls(0.0, zeros, 0.0, 0, zeros.copy(), zeros.astype(np.int64))

    def merge(self, other: "SpikeStats") -> "SpikeStats":
        spikes = self.per_layer_spikes + other.per_layer_spikes
        slots = self.per_layer_slots + other.per_layer_slots
        return _stats_from_counts(spikes, slots)


def _stats_from_counts(per_layer_spikes: np.ndarray, per_layer_slots: np.ndarray) -> SpikeStats:
    total = float(per_layer_spikes.sum())
    slots = int(per_layer_slots.sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        per_layer = np.where(per_layer_slots > 0, per_layer_spikes / np.maximum(per_layer_slots, 1), 0.0)
    return SpikeStats(
        avg_rate=total / slots if slots else 0.0,
        per_layer_rate=per_layer,
        total_spikes=total,
        slots=slots,
        per_layer_spikes=per_layer_spikes.astype(float),
        per_layer_slots=per_layer_slots.astype(np.int64),
    )


def measure_spike_rate(record: ForwardRecord, scope: Optional[Iterable[int]] = None) -> SpikeStats:
    """
    Spike statistics of ``record`` over the layers in ``scope``.

    The default scope is ``default_rate_scope``: hidden layers only.
    """
    if not record.o:
        raise EmptyScopeError("forward record holds no layers")
    indices = list(default_rate_scope(len(record.o)) if scope is None else scope)
    if not indices:
        raise EmptyScopeError("spike-rate scope selects no layers")

    spikes = np.array([float(record.o[n].sum()) for n in indices])
    slots = np.array([record.o[n].size for n in indices], dtype=np.int64)
    return _stats_from_counts(spikes, slots)
