"""
Compression package for spiking networks.

This package provides the pruning and quantization projections, the ADMM
retraining schedules with their hard-compression baseline, and the
compression-ratio metrics.
"""

from .projections import (
    QuantSpec,
    kept_count,
    prune_project,
    nearest_levels,
    quantize_iterations,
    quantize_project,
    is_quantized,
)
from .admm import (
    AdmmState,
    CompressionSpec,
    CompressionResult,
    DiagRow,
    ProximalPenalty,
    augmented_loss,
    proximal_gradient,
    multiplier_update,
    admm_prune,
    admm_quantize,
    admm_joint,
    hard_compress,
)
from .metrics import (
    CompressionReport,
    LayerStats,
    layer_statistics,
    residual_memory,
    residual_spikes,
    residual_ops,
    as_percent,
    multiplier,
)

__all__ = [
    'QuantSpec',
    'kept_count',
    'prune_project',
    'nearest_levels',
    'quantize_iterations',
    'quantize_project',
    'is_quantized',
    'AdmmState',
    'CompressionSpec',
    'CompressionResult',
    'DiagRow',
    'ProximalPenalty',
    'augmented_loss',
    'proximal_gradient',
    'multiplier_update',
    'admm_prune',
    'admm_quantize',
    'admm_joint',
    'hard_compress',
    'CompressionReport',
    'LayerStats',
    'layer_statistics',
    'residual_memory',
    'residual_spikes',
    'residual_ops',
    'as_percent',
    'multiplier',
]
