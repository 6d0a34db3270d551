"""
Compression ratios for spiking networks.

    R_mem = (1 - s) * b / B      residual weight memory
    R_s   = r / R                residual spikes
    R_ops = R_mem * R_s          residual operations (a coarse estimate:
                                 bitwidth does not scale addition cost linearly)

Percentages are reported rounded half-up to two decimals and multipliers
are the reciprocal of the rounded percentage, the way published tables
print them; the fractions themselves keep full precision.
"""

from dataclasses import dataclass, asdict
from decimal import Decimal, ROUND_HALF_UP
from typing import List, Optional

import numpy as np

from snn.errors import RangeError, UndefinedBaselineError
from snn.network import SpikingNetwork

DEFAULT_BASELINE_BITWIDTH = 32


def residual_memory(s: float, b: int, B: int = DEFAULT_BASELINE_BITWIDTH) -> float:
    if not 0.0 <= s < 1.0:
        raise RangeError(f"sparsity must lie in [0, 1), got {s}")
    if not 1 <= b <= B:
        raise RangeError(f"bitwidth must satisfy 1 <= b <= B, got b={b}, B={B}")
    return (1.0 - s) * b / B


def residual_spikes(r: float, R: float) -> float:
    if R <= 0:
        raise UndefinedBaselineError(f"baseline spike rate must be positive, got {R}")
    if r < 0:
        raise RangeError(f"spike rate must be non-negative, got {r}")
    return r / R


def residual_ops(r_mem: float, r_s: float) -> float:
    if not 0.0 < r_mem <= 1.0:
        raise RangeError(f"R_mem must lie in (0, 1], got {r_mem}")
    if r_s < 0.0:
        raise RangeError(f"R_s must be non-negative, got {r_s}")
    return r_mem * r_s


def as_percent(fraction: float) -> float:
    """Fraction -> percentage rounded half-up to 2 decimals (0.0234375 -> 2.34)."""
    value = Decimal(repr(float(fraction))) * 100
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def multiplier(fraction: float) -> Optional[float]:
    """Compression factor printed next to a percentage: 100 / rounded percent, to 2 decimals."""
    percent = as_percent(fraction)
    if percent == 0:
        return None
    value = Decimal(100) / Decimal(repr(float(percent)))
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class CompressionReport:
    """
    Measured outcome of one compression run against its own baseline.

    ``baseline_rate`` (R) and ``compressed_rate`` (r) are hidden-layer
    spike rates on the test split.
    """
    lambda_: float
    sparsity: float
    bitwidth: int
    baseline_bitwidth: int
    baseline_rate: float
    compressed_rate: float
    r_mem: float
    r_s: float
    r_ops: float
    accuracy: float
    baseline_accuracy: float

    @classmethod
    def build(cls, *, lambda_: float, sparsity: float, bitwidth: int, baseline_rate: float,
              compressed_rate: float, accuracy: float, baseline_accuracy: float,
              baseline_bitwidth: int = DEFAULT_BASELINE_BITWIDTH) -> "CompressionReport":
        r_mem = residual_memory(sparsity, bitwidth, baseline_bitwidth)
        r_s = residual_spikes(compressed_rate, baseline_rate)
        return cls(
            lambda_=lambda_,
            sparsity=sparsity,
            bitwidth=bitwidth,
            baseline_bitwidth=baseline_bitwidth,
            baseline_rate=baseline_rate,
            compressed_rate=compressed_rate,
            r_mem=r_mem,
            r_s=r_s,
            r_ops=residual_ops(r_mem, r_s),
            accuracy=accuracy,
            baseline_accuracy=baseline_accuracy,
        )

    @property
    def accuracy_loss(self) -> float:
        """Signed change in accuracy, percentage points; negative means worse."""
        return (self.accuracy - self.baseline_accuracy) * 100.0

    @property
    def r_mem_multiplier(self) -> Optional[float]:
        return multiplier(self.r_mem)

    @property
    def r_ops_multiplier(self) -> Optional[float]:
        return multiplier(self.r_ops)

    def to_row(self) -> dict:
        """CSV row in the published column order, with the measured baseline appended."""
        return {
            "lambda": self.lambda_,
            "sparsity": self.sparsity,
            "bitwidth": self.bitwidth,
            "spike_rate": round(self.compressed_rate, 6),
            "r_mem_pct": as_percent(self.r_mem),
            "r_mem_x": self.r_mem_multiplier,
            "r_ops_pct": as_percent(self.r_ops),
            "r_ops_x": self.r_ops_multiplier,
            "accuracy": round(self.accuracy * 100.0, 2),
            "accuracy_loss": round(self.accuracy_loss, 2),
            "baseline_rate": round(self.baseline_rate, 6),
            "baseline_accuracy": round(self.baseline_accuracy * 100.0, 2),
        }

    def describe(self) -> dict:
        return {k: v for k, v in asdict(self).items()}


@dataclass(frozen=True)
class LayerStats:
    """Connection and weight-level counts of one layer."""
    network: str
    layer: int
    kind: str
    weights: int
    pruned: int
    distinct_values: int
    alpha: Optional[float]

    @property
    def kept_fraction(self) -> float:
        return (self.weights - self.pruned) / self.weights if self.weights else 0.0

    def to_row(self) -> dict:
        row = asdict(self)
        row["kept_pct"] = as_percent(self.kept_fraction)
        return row


def layer_statistics(net: SpikingNetwork, network: str = "compressed") -> List[LayerStats]:
    """
    Per layer: number of zero (pruned) connections and number of distinct
    weight values. A b-bit quantized layer has at most 2b+1 distinct values.
    """
    stats = []
    for index, layer in enumerate(net.layers):
        values = layer.values
        stats.append(LayerStats(
            network=network,
            layer=index,
            kind=layer.weights.kind,
            weights=int(values.size),
            pruned=int(values.size - np.count_nonzero(values)),
            distinct_values=int(np.unique(values).size),
            alpha=layer.alpha,
        ))
    return stats
