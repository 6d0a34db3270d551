"""
Spiking network core.

This package provides LIF neuron dynamics, synaptic layers, the network
container with forward simulation, spike encoding and spike statistics.
"""

from .lif import LifParams, NeuronState, lif_step, heaviside, ramp, spike, surrogate_grad
from .layers import (
    LayerWeights,
    dense_integrate,
    conv2d_integrate,
    integrate,
    integrate_backward,
    im2col,
    col2im,
)
from .network import (
    Layer,
    SpikingNetwork,
    ForwardRecord,
    SpikeStats,
    build_network,
    network_from_weights,
    forward_pass,
    measure_spike_rate,
    default_rate_scope,
    compressible_layers,
)
from .encoding import bernoulli_encode, encode_batch

__all__ = [
    'LifParams',
    'NeuronState',
    'lif_step',
    'heaviside',
    'ramp',
    'spike',
    'surrogate_grad',
    'LayerWeights',
    'dense_integrate',
    'conv2d_integrate',
    'integrate',
    'integrate_backward',
    'im2col',
    'col2im',
    'Layer',
    'SpikingNetwork',
    'ForwardRecord',
    'SpikeStats',
    'build_network',
    'network_from_weights',
    'forward_pass',
    'measure_spike_rate',
    'default_rate_scope',
    'compressible_layers',
    'bernoulli_encode',
    'encode_batch',
]
