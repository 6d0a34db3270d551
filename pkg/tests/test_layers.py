import numpy as np
import pytest

from snn.errors import DimensionError
from snn.layers import LayerWeights, conv_output_shape, integrate, integrate_backward


def conv_by_loops(kernel, spikes, stride):
    out_ch, in_ch, kh, kw = kernel.shape
    _, height, width = spikes.shape
    oh, ow = (height - kh) // stride + 1, (width - kw) // stride + 1
    out = np.zeros((out_ch, oh, ow))
    for k in range(out_ch):
        for i in range(oh):
            for j in range(ow):
                for c in range(in_ch):
                    for p in range(kh):
                        for q in range(kw):
                            out[k, i, j] += kernel[k, c, p, q] * spikes[c, i * stride + p, j * stride + q]
    return out


def unrolled_dense(kernel, in_shape, stride):
    out_ch, in_ch, kh, kw = kernel.shape
    _, oh, ow = conv_output_shape(in_shape, kernel.shape, stride)
    matrix = np.zeros((out_ch, oh, ow) + tuple(in_shape))
    for k in range(out_ch):
        for i in range(oh):
            for j in range(ow):
                matrix[k, i, j, :, i * stride:i * stride + kh, j * stride:j * stride + kw] = kernel[k]
    return matrix.reshape(out_ch * oh * ow, -1)


def test_dense_example():
    weights = LayerWeights.dense(np.array([[1.0, 2.0], [3.0, 4.0]]))
    np.testing.assert_array_equal(integrate(weights, np.array([1.0, 0.0])), [1.0, 3.0])
    np.testing.assert_array_equal(integrate(weights, np.array([[1.0, 1.0], [0.0, 1.0]])), [[3.0, 7.0], [2.0, 4.0]])


def test_dense_rejects_wrong_length():
    weights = LayerWeights.dense(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        integrate(weights, np.ones(4))


def test_conv_output_shape():
    assert conv_output_shape((1, 28, 28), (8, 1, 5, 5), 2) == (8, 12, 12)
    assert conv_output_shape((8, 12, 12), (16, 8, 3, 3), 2) == (16, 5, 5)


def test_kernel_larger_than_input_raises():
    with pytest.raises(DimensionError):
        LayerWeights.conv2d(np.ones((1, 1, 5, 5)), (1, 3, 3))


@pytest.mark.parametrize("stride", [1, 2])
def test_conv_matches_nested_loops(stride):
    rng = np.random.default_rng(stride)
    kernel = rng.normal(size=(3, 2, 3, 3))
    spikes = (rng.random((2, 7, 6)) < 0.5).astype(float)
    weights = LayerWeights.conv2d(kernel, (2, 7, 6), stride)
    np.testing.assert_allclose(integrate(weights, spikes), conv_by_loops(kernel, spikes, stride), atol=1e-12)


def test_conv_equals_unrolled_dense_exactly(dyadic):
    rng = np.random.default_rng(11)
    kernel = dyadic(rng, (4, 2, 3, 3))
    in_shape = (2, 8, 8)
    conv = LayerWeights.conv2d(kernel, in_shape, 2)
    dense = LayerWeights.dense(unrolled_dense(kernel, in_shape, 2))
    for _ in range(5):
        spikes = (rng.random(in_shape) < 0.4).astype(float)
        np.testing.assert_array_equal(integrate(conv, spikes).ravel(), integrate(dense, spikes.ravel()))


def test_conv_batch_matches_single_samples():
    rng = np.random.default_rng(5)
    weights = LayerWeights.conv2d(rng.normal(size=(2, 1, 3, 3)), (1, 6, 6), 1)
    batch = (rng.random((3, 1, 6, 6)) < 0.5).astype(float)
    stacked = integrate(weights, batch)
    for b in range(3):
        np.testing.assert_allclose(stacked[b], integrate(weights, batch[b]))


def test_conv_backward_weight_gradient_matches_loops():
    rng = np.random.default_rng(7)
    kernel = rng.normal(size=(2, 2, 3, 3))
    weights = LayerWeights.conv2d(kernel, (2, 7, 7), 2)
    spikes = (rng.random((2, 2, 7, 7)) < 0.5).astype(float)
    grad_out = rng.normal(size=(2,) + weights.out_shape)

    grad_w, _ = integrate_backward(weights, grad_out, spikes)

    expected = np.zeros_like(kernel)
    _, oh, ow = weights.out_shape
    for b in range(2):
        for i in range(oh):
            for j in range(ow):
                patch = spikes[b, :, 2 * i:2 * i + 3, 2 * j:2 * j + 3]
                expected += grad_out[b, :, i, j][:, None, None, None] * patch[None]
    np.testing.assert_allclose(grad_w, expected, atol=1e-12)


@pytest.mark.parametrize("kind", ["dense", "conv2d"])
def test_backward_is_adjoint_of_forward(kind):
    rng = np.random.default_rng(13)
    if kind == "dense":
        weights = LayerWeights.dense(rng.normal(size=(5, 9)))
    else:
        weights = LayerWeights.conv2d(rng.normal(size=(3, 1, 3, 3)), (1, 5, 5), 1)
    x = rng.normal(size=(4,) + weights.in_shape)
    g = rng.normal(size=(4,) + weights.out_shape)

    grad_w, grad_in = integrate_backward(weights, g, x)

    forward = integrate(weights, x)
    assert np.sum(g * forward) == pytest.approx(np.sum(grad_in * x))
    assert np.sum(g * forward) == pytest.approx(np.sum(grad_w * weights.values))
