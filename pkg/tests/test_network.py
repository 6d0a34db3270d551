import numpy as np
import pytest

from snn.encoding import bernoulli_encode, encode_batch
from snn.errors import DimensionError, EmptyScopeError, RangeError
from snn.network import (
    ForwardRecord,
    build_network,
    compressible_layers,
    default_rate_scope,
    forward_pass,
    measure_spike_rate,
    network_from_weights,
)


def simulate_by_loops(weights, input_spikes, params):
    """Scalar reference simulator for dense networks: one neuron at a time."""
    T = len(input_spikes)
    u = [np.zeros(w.shape[0]) for w in weights]
    o = [np.zeros(w.shape[0]) for w in weights]
    spikes_out = [np.zeros((T, w.shape[0])) for w in weights]
    for t in range(T):
        pre = input_spikes[t]
        for n, w in enumerate(weights):
            for i in range(w.shape[0]):
                drive = 0.0
                for j in range(w.shape[1]):
                    drive += w[i, j] * pre[j]
                u[n][i] = params.decay * u[n][i] * (1.0 - o[n][i]) + drive
                o[n][i] = 1.0 if u[n][i] >= params.u_th else 0.0
            spikes_out[n][t] = o[n]
            pre = o[n].copy()
    return spikes_out


def test_build_dense_shapes():
    net = build_network("784-400-10", np.random.default_rng(0))
    assert [w.shape for w in net.weights] == [(400, 784), (10, 400)]
    assert net.num_classes == 10
    bound = np.sqrt(3.0 / 784)
    assert np.abs(net.weights[0]).max() <= bound


def test_build_conv_shapes():
    net = build_network("1x28x28-8C5S2-16C3S2-10", np.random.default_rng(0))
    assert [w.shape for w in net.weights] == [(8, 1, 5, 5), (16, 8, 3, 3), (10, 400)]


@pytest.mark.parametrize("arch", ["784", "784-x-10", "784-8C3S1-10", "1x8x8-4C3S1"])
def test_bad_architecture_raises(arch):
    with pytest.raises(ValueError):
        build_network(arch, np.random.default_rng(0))


def test_single_neuron_example(params):
    net = network_from_weights("1-1", [np.array([[0.3]])])
    record = forward_pass(net, np.array([[1.0], [1.0], [0.0]]), params)
    np.testing.assert_array_equal(record.o[0][:, 0, 0], [1.0, 1.0, 0.0])
    np.testing.assert_allclose(record.u[0][:, 0, 0], [0.3, 0.3, 0.0])


def test_same_timestep_propagation(params):
    net = network_from_weights("1-1-1", [np.array([[1.0]]), np.array([[1.0]])])
    record = forward_pass(net, np.array([[1.0]]), params)
    assert record.o[1][0, 0, 0] == 1.0


def test_forward_matches_scalar_simulator(params, dyadic):
    rng = np.random.default_rng(21)
    for _ in range(10):
        sizes = [int(rng.integers(2, 7)) for _ in range(3)]
        weights = [dyadic(rng, (sizes[1], sizes[0])), dyadic(rng, (sizes[2], sizes[1]))]
        net = network_from_weights("-".join(map(str, sizes)), weights)
        spikes = (rng.random((6, sizes[0])) < 0.5).astype(float)

        record = forward_pass(net, spikes, params)
        expected = simulate_by_loops(weights, spikes, params)
        for n in range(2):
            np.testing.assert_array_equal(record.o[n][:, 0], expected[n])


def test_forward_is_deterministic(tiny_net, params):
    spikes = (np.random.default_rng(1).random((5, 3, 16)) < 0.5).astype(float)
    first = forward_pass(tiny_net, spikes, params)
    second = forward_pass(tiny_net, spikes, params)
    for a, b in zip(first.o, second.o):
        np.testing.assert_array_equal(a, b)


def test_forward_rejects_wrong_input(tiny_net, params):
    with pytest.raises(DimensionError):
        forward_pass(tiny_net, np.zeros((5, 15)), params)


def test_forward_accepts_image_batches_for_flat_input(tiny_net, params, synthetic_train):
    images = synthetic_train.images[:4]
    spikes = encode_batch(images, 3, [10, 11, 12, 13])
    assert spikes.shape == (3, 4, 4, 4)

    record = forward_pass(tiny_net, spikes, params)
    flat = forward_pass(tiny_net, spikes.reshape(3, 4, 16), params)
    assert record.input_spikes.shape == (3, 4, 16)
    assert record.batch_size == 4
    for a, b in zip(record.o, flat.o):
        np.testing.assert_array_equal(a, b)


def test_forward_rejects_image_batch_of_wrong_size(tiny_net, params):
    with pytest.raises(DimensionError):
        forward_pass(tiny_net, np.zeros((3, 4, 5, 5)), params)


def test_spike_rate_example():
    o0 = np.zeros((2, 1, 3))
    o0[0, 0, :] = 1.0
    record = ForwardRecord(input_spikes=np.zeros((2, 1, 1)), u=[o0, np.zeros((2, 1, 2))], o=[o0, np.ones((2, 1, 2))])
    stats = measure_spike_rate(record)
    assert stats.avg_rate == pytest.approx(0.5)
    assert stats.total_spikes == 3
    assert stats.slots == 6
    assert measure_spike_rate(record, scope=[0, 1]).avg_rate == pytest.approx(7 / 10)


def test_spike_rate_merge_is_exact():
    a = ForwardRecord(np.zeros((1, 1, 1)), [np.zeros((1, 1, 2))], [np.array([[[1.0, 0.0]]])])
    b = ForwardRecord(np.zeros((2, 1, 1)), [np.zeros((2, 1, 2))], [np.ones((2, 1, 2))])
    merged = measure_spike_rate(a, [0]).merge(measure_spike_rate(b, [0]))
    assert merged.avg_rate == pytest.approx(5 / 6)


def test_empty_scope_raises():
    record = ForwardRecord(np.zeros((1, 1, 1)), [np.zeros((1, 1, 2))], [np.zeros((1, 1, 2))])
    with pytest.raises(EmptyScopeError):
        measure_spike_rate(record, scope=[])


def test_rate_scope_and_compressible_layers():
    assert list(default_rate_scope(3)) == [0, 1]
    assert list(default_rate_scope(1)) == [0]
    assert compressible_layers(2) == [0, 1]
    assert compressible_layers(4) == [1, 2]
    assert compressible_layers(4, include_edges=True) == [0, 1, 2, 3]


def test_bernoulli_encoding():
    image = np.array([[0.0, 1.0], [0.5, 0.25]])
    train = bernoulli_encode(image, 200, rng_seed=4)
    assert train.shape == (200, 2, 2)
    assert not train[:, 0, 0].any()
    assert train[:, 0, 1].all()
    assert 0.35 < train[:, 1, 0].mean() < 0.65
    np.testing.assert_array_equal(train, bernoulli_encode(image, 200, rng_seed=4))


def test_bernoulli_rejects_bad_pixels():
    with pytest.raises(RangeError):
        bernoulli_encode(np.array([1.2]), 5, rng_seed=0)
    with pytest.raises(RangeError):
        bernoulli_encode(np.array([0.5]), 0, rng_seed=0)


def test_encode_batch_layout():
    images = np.random.default_rng(0).random((3, 4))
    trains = encode_batch(images, 6, [1, 2, 3])
    assert trains.shape == (6, 3, 4)
    np.testing.assert_array_equal(trains[:, 1], bernoulli_encode(images[1], 6, 2))
