"""
Euclidean projections onto the two constraint sets used during compression.

Pruning keeps the largest-magnitude entries of a layer. Quantization maps a
layer onto alpha * {0, ±2^0, ..., ±2^(b-1)} by alternating between the
nearest-level assignment (alpha fixed) and the least-squares scale
(assignment fixed), starting from alpha = 1 unless another start is given.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from logger_utils import logger
from snn.errors import DegenerateScaleWarning, RangeError


@dataclass(frozen=True)
class QuantSpec:
    """
    Args:
        bitwidth: b, giving 2b+1 levels
        iterations: I, alternating-minimisation rounds
        initial_alpha: starting scale; None starts from max|V| / 2^(b-1), which
            puts the largest entry on the top level
    """
    bitwidth: int
    iterations: int = 3
    initial_alpha: Optional[float] = 1.0

    def __post_init__(self):
        if self.bitwidth < 1:
            raise RangeError(f"bitwidth must be at least 1, got {self.bitwidth}")
        if self.iterations < 1:
            raise RangeError(f"iterations must be at least 1, got {self.iterations}")
        if self.initial_alpha is not None and not self.initial_alpha > 0:
            raise RangeError(f"initial_alpha must be positive, got {self.initial_alpha}")

    def start_alpha(self, V: np.ndarray) -> float:
        if self.initial_alpha is not None:
            return float(self.initial_alpha)
        peak = float(np.max(np.abs(V))) if np.size(V) else 0.0
        return peak / 2.0 ** (self.bitwidth - 1) if peak > 0 else 1.0

    @property
    def magnitudes(self) -> np.ndarray:
        """Non-negative levels 0, 1, 2, ..., 2^(b-1)."""
        return np.concatenate(([0.0], 2.0 ** np.arange(self.bitwidth)))

    @property
    def levels(self) -> np.ndarray:
        mags = self.magnitudes[1:]
        return np.concatenate((-mags[::-1], [0.0], mags))


def kept_count(size: int, sparsity: float) -> int:
    """ceil((1 - s) * n): never keep fewer than the target allows."""
    pruned = math.floor(sparsity * size + 1e-9)
    return size - pruned


def prune_project(V: np.ndarray, s: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Keep the ceil((1-s)*n) largest-magnitude entries of ``V`` and zero the rest.

    Ties at the cut-off magnitude keep the lower flat index.

    Returns:
        tuple: (projected tensor, binary mask of kept entries)
    """
    if not 0.0 <= s < 1.0:
        raise RangeError(f"sparsity must lie in [0, 1), got {s}")
    V = np.asarray(V, dtype=float)
    flat = V.ravel()
    keep = kept_count(flat.size, s)
    order = np.argsort(-np.abs(flat), kind="stable")
    mask = np.zeros(flat.size)
    mask[order[:keep]] = 1.0
    mask = mask.reshape(V.shape)
    return V * mask, mask


def nearest_levels(x: np.ndarray, spec: QuantSpec) -> np.ndarray:
    """
    Snap each entry of ``x`` to the nearest level in {0, ±2^0, ..., ±2^(b-1)};
    a value exactly between two levels goes to the smaller magnitude.
    """
    mags = spec.magnitudes
    midpoints = (mags[:-1] + mags[1:]) / 2.0
    idx = np.searchsorted(midpoints, np.abs(x), side="left")
    return np.sign(x) * mags[idx]


def quantize_iterations(V: np.ndarray, spec: QuantSpec) -> Iterator[Tuple[np.ndarray, float, bool]]:
    """
    Yield (assignment Z~, alpha, degenerate) after every alternating round.

    A round whose assignment is all zeros cannot re-fit alpha; it is
    yielded with the previous alpha and ``degenerate=True``, and the
    iteration stops.
    """
    V = np.asarray(V, dtype=float)
    alpha = spec.start_alpha(V)
    for _ in range(spec.iterations):
        levels = nearest_levels(V / alpha, spec)
        energy = float(np.sum(levels * levels))
        if energy == 0.0:
            yield levels, alpha, True
            return
        alpha = float(np.sum(V * levels)) / energy
        yield levels, alpha, False


def quantize_project(V: np.ndarray, spec: QuantSpec) -> Tuple[np.ndarray, float]:
    """
    Quantize ``V`` onto alpha * levels.

    Returns:
        tuple: (alpha * Z~, alpha)

    Emits DegenerateScaleWarning when every entry rounds to zero.
    """
    V = np.asarray(V, dtype=float)
    levels, alpha = np.zeros_like(V), spec.start_alpha(V)
    for levels, alpha, degenerate in quantize_iterations(V, spec):
        if degenerate:
            logger.warning(f"Quantization degenerate: all {V.size} entries map to level 0, keeping alpha={alpha}")
            warnings.warn(f"all entries quantized to 0; alpha kept at {alpha}", DegenerateScaleWarning)
    return alpha * levels, alpha


def is_quantized(W: np.ndarray, alpha: float, spec: QuantSpec) -> np.ndarray:
    """Elementwise: does W / alpha lie exactly on a level?"""
    return np.isin(np.asarray(W) / alpha, spec.levels)


def prune_violations(Z: np.ndarray, s: float) -> int:
    """Non-zero entries beyond the allowed support size."""
    return max(0, int(np.count_nonzero(Z)) - kept_count(Z.size, s))


def quant_violations(Z: np.ndarray, alpha: float, spec: QuantSpec) -> int:
    return int(np.size(Z) - np.count_nonzero(is_quantized(Z, alpha, spec)))
