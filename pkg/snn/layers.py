"""
Synaptic layers: dense and 2-D convolution, both without bias.

Inputs are spike tensors, so the weighted sums are masked row sums. The
convolution goes through an im2col unrolling so that its forward and
backward passes reduce to the same matrix products as the dense layer.
Padding is always "valid".
"""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from .errors import DimensionError, RangeError

DENSE = "dense"
CONV2D = "conv2d"


@dataclass(frozen=True)
class LayerWeights:
    """
    Weight tensor of one synaptic layer plus the shapes it maps between.

    dense values are (out, in); conv2d values are (out_ch, in_ch, kh, kw).
    Shapes exclude the batch axis.
    """
    kind: str
    values: np.ndarray
    in_shape: Tuple[int, ...]
    out_shape: Tuple[int, ...]
    stride: int = 1

    @classmethod
    def dense(cls, values: np.ndarray) -> "LayerWeights":
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise DimensionError(f"dense weights must be 2-D, got shape {values.shape}")
        return cls(kind=DENSE, values=values, in_shape=(values.shape[1],), out_shape=(values.shape[0],))

    @classmethod
    def conv2d(cls, values: np.ndarray, in_shape: Tuple[int, int, int], stride: int = 1) -> "LayerWeights":
        values = np.asarray(values, dtype=float)
        if values.ndim != 4:
            raise DimensionError(f"conv2d weights must be 4-D, got shape {values.shape}")
        if stride < 1:
            raise RangeError(f"stride must be a positive integer, got {stride}")
        in_shape = tuple(int(d) for d in in_shape)
        if len(in_shape) != 3 or in_shape[0] != values.shape[1]:
            raise DimensionError(f"input shape {in_shape} does not match kernel {values.shape}")
        return cls(
            kind=CONV2D,
            values=values,
            in_shape=in_shape,
            out_shape=conv_output_shape(in_shape, values.shape, stride),
            stride=int(stride),
        )

    @property
    def size(self) -> int:
        return int(self.values.size)

    def with_values(self, values: np.ndarray) -> "LayerWeights":
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise DimensionError(f"new weights {values.shape} do not match {self.values.shape}")
        return replace(self, values=values)


def conv_output_shape(in_shape, kernel_shape, stride: int) -> Tuple[int, int, int]:
    _, height, width = in_shape
    out_ch, _, kh, kw = kernel_shape
    if kh > height or kw > width:
        raise DimensionError(f"kernel {kh}x{kw} larger than input {height}x{width}")
    return (int(out_ch), (height - kh) // stride + 1, (width - kw) // stride + 1)


def im2col(input_data: np.ndarray, filter_h: int, filter_w: int, stride: int = 1) -> np.ndarray:
    """(N, C, H, W) -> (N*out_h*out_w, C*filter_h*filter_w)."""
    n, c, h, w = input_data.shape
    out_h = (h - filter_h) // stride + 1
    out_w = (w - filter_w) // stride + 1

    col = np.zeros((n, c, filter_h, filter_w, out_h, out_w))
    for y in range(filter_h):
        y_max = y + stride * out_h
        for x in range(filter_w):
            x_max = x + stride * out_w
            col[:, :, y, x, :, :] = input_data[:, :, y:y_max:stride, x:x_max:stride]

    # (N, C, fh, fw, oh, ow) -> (N, oh, ow, C, fh, fw) -> rows per output pixel
    return col.transpose(0, 4, 5, 1, 2, 3).reshape(n * out_h * out_w, -1)


def col2im(col: np.ndarray, input_shape, filter_h: int, filter_w: int, stride: int = 1) -> np.ndarray:
    """Adjoint of ``im2col``: scatter-add rows back onto an (N, C, H, W) image."""
    n, c, h, w = input_shape
    out_h = (h - filter_h) // stride + 1
    out_w = (w - filter_w) // stride + 1

    col = col.reshape(n, out_h, out_w, c, filter_h, filter_w).transpose(0, 3, 4, 5, 1, 2)
    img = np.zeros((n, c, h, w))
    for y in range(filter_h):
        y_max = y + stride * out_h
        for x in range(filter_w):
            x_max = x + stride * out_w
            img[:, :, y:y_max:stride, x:x_max:stride] += col[:, :, y, x, :, :]
    return img


def dense_integrate(weights: LayerWeights, spikes: np.ndarray) -> np.ndarray:
    """
    Dendritic sums W·o for a dense layer.

    Args:
        weights: dense layer weights, shape (out, in)
        spikes: presynaptic spikes, shape (in,) or (batch, in)

    Returns:
        np.ndarray: potentials increments, shape (out,) or (batch, out)
    """
    spikes = np.asarray(spikes, dtype=float)
    if spikes.shape[-1:] != weights.in_shape:
        raise DimensionError(f"spike vector of length {spikes.shape[-1:]} does not match input {weights.in_shape}")
    return spikes @ weights.values.T


def conv2d_integrate(weights: LayerWeights, spikes: np.ndarray) -> np.ndarray:
    """
    Valid cross-correlation of a spike map with the layer kernels.

    Accepts (C, H, W) or (batch, C, H, W) and returns the matching
    (out_ch, oh, ow) or (batch, out_ch, oh, ow).
    """
    spikes = np.asarray(spikes, dtype=float)
    unbatched = spikes.ndim == 3
    if unbatched:
        spikes = spikes[None]
    if spikes.ndim != 4 or spikes.shape[1:] != weights.in_shape:
        raise DimensionError(f"spike map shape {spikes.shape[1:]} does not match input {weights.in_shape}")

    out_ch, _, kh, kw = weights.values.shape
    n = spikes.shape[0]
    _, out_h, out_w = weights.out_shape
    col = im2col(spikes, kh, kw, weights.stride)
    out = col @ weights.values.reshape(out_ch, -1).T
    out = out.reshape(n, out_h, out_w, out_ch).transpose(0, 3, 1, 2)
    return out[0] if unbatched else out


def integrate(weights: LayerWeights, spikes: np.ndarray) -> np.ndarray:
    """Dispatch to the integrator matching ``weights.kind``."""
    if weights.kind == DENSE:
        return dense_integrate(weights, spikes)
    return conv2d_integrate(weights, spikes)


def integrate_backward(weights: LayerWeights, grad_out: np.ndarray, spikes: np.ndarray):
    """
    Backward pass of ``integrate`` for a batch.

    Args:
        weights: layer weights
        grad_out: dL/d(integrated input), shape (batch, *out_shape)
        spikes: presynaptic spikes used in the forward pass, shape (batch, *in_shape)

    Returns:
        tuple: (dL/dW summed over the batch, dL/d(spikes))
    """
    if weights.kind == DENSE:
        return grad_out.T @ spikes, grad_out @ weights.values

    out_ch, _, kh, kw = weights.values.shape
    n = spikes.shape[0]
    col = im2col(spikes, kh, kw, weights.stride)
    g2 = grad_out.transpose(0, 2, 3, 1).reshape(-1, out_ch)
    grad_w = (g2.T @ col).reshape(weights.values.shape)
    grad_col = g2 @ weights.values.reshape(out_ch, -1)
    grad_in = col2im(grad_col, (n,) + tuple(weights.in_shape), kh, kw, weights.stride)
    return grad_w, grad_in
