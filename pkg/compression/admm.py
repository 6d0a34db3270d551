"""
ADMM-constrained retraining for connection pruning and weight quantization,
plus the projected-retraining-only baseline (hard compression).

Every compressed layer carries a constraint-satisfying copy Z and scaled
multipliers Y~. One ADMM round is one epoch of SGD on
f(W) + (rho/2) * ||W - Z + Y~||^2, followed by Z <- proj(W + Y~) and
Y~ <- Y~ + W - Z. A hard retraining phase then projects W itself after
every update, so the result satisfies the constraint exactly.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from logger_utils import logger, log_decorator
from snn.errors import DimensionError, RangeError
from snn.network import SpikingNetwork, compressible_layers
from training.train_config import TrainConfig
from training.trainer import TrainHistory, train
from utils.datasets import Dataset
from .projections import (
    QuantSpec,
    prune_project,
    prune_violations,
    quant_violations,
    quantize_project,
)

Tensors = Union[np.ndarray, Sequence[np.ndarray]]
LayerProjection = Callable[[int, np.ndarray], Tuple[np.ndarray, Optional[float]]]


@dataclass(frozen=True)
class CompressionSpec:
    """
    Args:
        sparsity: s, fraction of connections removed per layer (None: no pruning)
        bitwidth: b (None: no quantization)
        quant_iterations: I
        quant_alpha_init: starting quantization scale (None: fit from the layer)
        lambda_: activity penalty λ applied while retraining
        rho: ADMM penalty coefficient
    """
    sparsity: Optional[float] = None
    bitwidth: Optional[int] = None
    quant_iterations: int = 3
    quant_alpha_init: Optional[float] = None
    lambda_: float = 0.0
    rho: float = 5e-4

    def __post_init__(self):
        if self.sparsity is not None and not 0.0 <= self.sparsity < 1.0:
            raise RangeError(f"sparsity must lie in [0, 1), got {self.sparsity}")
        if self.rho < 0:
            raise RangeError(f"rho must be non-negative, got {self.rho}")
        if self.lambda_ < 0:
            raise RangeError(f"lambda must be non-negative, got {self.lambda_}")

    @property
    def quant(self) -> Optional[QuantSpec]:
        if self.bitwidth is None:
            return None
        return QuantSpec(bitwidth=self.bitwidth, iterations=self.quant_iterations,
                         initial_alpha=self.quant_alpha_init)


@dataclass
class AdmmState:
    """Per-layer ADMM variables. ``W`` is the snapshot taken at the last Z-update."""
    layer_index: int
    W: np.ndarray
    Z: np.ndarray
    Y_tilde: np.ndarray
    rho: float
    alpha: Optional[float] = None

    def __post_init__(self):
        if not (self.W.shape == self.Z.shape == self.Y_tilde.shape):
            raise DimensionError(
                f"layer {self.layer_index}: W {self.W.shape}, Z {self.Z.shape}, Y~ {self.Y_tilde.shape} differ"
            )


@dataclass(frozen=True)
class DiagRow:
    epoch: int
    stage: str
    layer: int
    w_minus_z: float
    y_tilde_norm: float
    alpha: Optional[float]
    violations: int


@dataclass
class CompressionResult:
    net: SpikingNetwork
    history: TrainHistory = field(default_factory=TrainHistory)
    diagnostics: List[DiagRow] = field(default_factory=list)
    next_epoch: int = 0

    def describe(self) -> dict:
        return {"net": self.net.describe(), "epochs": len(self.history.rows), "diag_rows": len(self.diagnostics)}


def _pairs(*tensors: Tensors) -> List[Tuple[np.ndarray, ...]]:
    lists = [[t] if isinstance(t, np.ndarray) or np.isscalar(t) else list(t) for t in tensors]
    if len({len(l) for l in lists}) != 1:
        raise DimensionError("W, Z and Y~ must cover the same number of layers")
    rows = []
    for group in zip(*lists):
        arrays = tuple(np.asarray(a, dtype=float) for a in group)
        if len({a.shape for a in arrays}) != 1:
            raise DimensionError(f"shape mismatch: {[a.shape for a in arrays]}")
        rows.append(arrays)
    return rows


def augmented_loss(base_loss: float, W: Tensors, Z: Tensors, Y_tilde: Tensors, rho: float) -> float:
    """base_loss + (rho/2) * sum over layers of ||W - Z + Y~||^2."""
    penalty = sum(float(np.sum((w - z + y) ** 2)) for w, z, y in _pairs(W, Z, Y_tilde))
    return float(base_loss + 0.5 * rho * penalty)


def proximal_gradient(W: np.ndarray, Z: np.ndarray, Y_tilde: np.ndarray, rho: float) -> np.ndarray:
    """Gradient of the proximal term with respect to W: rho * (W - Z + Y~)."""
    (w, z, y), = _pairs(W, Z, Y_tilde)
    return rho * (w - z + y)


def multiplier_update(Y_tilde: np.ndarray, W: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Y~ <- Y~ + W - Z."""
    (y, w, z), = _pairs(Y_tilde, W, Z)
    return y + w - z


class ProximalPenalty:
    """Loss augmentation adding the ADMM proximal term for every tracked layer."""

    def __init__(self, states: Dict[int, AdmmState]):
        self.states = states

    def value(self, net: SpikingNetwork) -> float:
        if not self.states:
            return 0.0
        idx = sorted(self.states)
        return augmented_loss(
            0.0,
            [net.weights[i] for i in idx],
            [self.states[i].Z for i in idx],
            [self.states[i].Y_tilde for i in idx],
            self.states[idx[0]].rho,
        )

    def gradient(self, net: SpikingNetwork) -> List[Optional[np.ndarray]]:
        grads: List[Optional[np.ndarray]] = [None] * net.num_layers
        for i, state in self.states.items():
            grads[i] = proximal_gradient(net.weights[i], state.Z, state.Y_tilde, state.rho)
        return grads


# ---------------------------------------------------------------- projections per layer

def _prune_projection(s: float) -> LayerProjection:
    def project(index: int, V: np.ndarray):
        Z, _ = prune_project(V, s)
        return Z, None
    return project


def _quant_projection(spec: QuantSpec, masks: Optional[Dict[int, np.ndarray]] = None) -> LayerProjection:
    def project(index: int, V: np.ndarray):
        if masks is not None and index in masks:
            V = V * masks[index]
        return quantize_project(V, spec)
    return project


def _violations(Z: np.ndarray, alpha: Optional[float], s: Optional[float], quant: Optional[QuantSpec]) -> int:
    count = 0
    if s is not None:
        count += prune_violations(Z, s)
    if quant is not None and alpha is not None:
        count += quant_violations(Z, alpha, quant)
    return count


def _layer_masks(net: SpikingNetwork, masks: Dict[int, np.ndarray]) -> List[Optional[np.ndarray]]:
    return [masks.get(i) for i in range(net.num_layers)]


# ---------------------------------------------------------------- ADMM and hard phases

def _admm_phase(result: CompressionResult, dataset: Dataset, config: TrainConfig, layers: Sequence[int],
                project: LayerProjection, rho: float, stage: str, *,
                sparsity: Optional[float] = None, quant: Optional[QuantSpec] = None,
                masks: Optional[Dict[int, np.ndarray]] = None,
                eval_dataset: Optional[Dataset] = None) -> Dict[int, AdmmState]:
    net = result.net
    states: Dict[int, AdmmState] = {}
    for i in layers:
        W = net.weights[i]
        Z, alpha = project(i, W)
        states[i] = AdmmState(layer_index=i, W=W.copy(), Z=Z, Y_tilde=np.zeros_like(W), rho=rho, alpha=alpha)
    penalty = ProximalPenalty(states)
    sgd_mask = _layer_masks(net, masks) if masks else None

    for _ in range(config.epochs_admm):
        epoch = result.next_epoch
        net, history = train(net, dataset, config, penalty, epochs=1, mask=sgd_mask,
                             eval_dataset=eval_dataset, stage=stage, epoch_offset=epoch)
        result.history.extend(history)
        for i, state in states.items():
            W = net.weights[i]
            state.W = W.copy()
            state.Z, state.alpha = project(i, W + state.Y_tilde)
            state.Y_tilde = multiplier_update(state.Y_tilde, W, state.Z)
            row = DiagRow(epoch, stage, i, float(np.linalg.norm(W - state.Z)), float(np.linalg.norm(state.Y_tilde)),
                          state.alpha, _violations(state.Z, state.alpha, sparsity, quant))
            result.diagnostics.append(row)
            logger.debug(f"[{stage}] epoch {epoch} layer {i}: |W-Z|={row.w_minus_z:.5f} "
                         f"|Y~|={row.y_tilde_norm:.5f} alpha={row.alpha}")
        result.next_epoch += 1
    result.net = net
    return states


def _projector(layers: Sequence[int], s: Optional[float], quant: Optional[QuantSpec],
               fixed_masks: Optional[Dict[int, np.ndarray]] = None):
    """Network projector used after every hard-retraining update."""
    def project(net: SpikingNetwork) -> SpikingNetwork:
        for i in layers:
            W = net.weights[i]
            changes = {}
            if fixed_masks is not None and i in fixed_masks:
                mask = fixed_masks[i]
                W = W * mask
                changes["mask"] = mask
            elif s is not None:
                W, mask = prune_project(W, s)
                changes["mask"] = mask
            if quant is not None:
                W, alpha = quantize_project(W, quant)
                changes["alpha"] = alpha
            net = net.with_layer(i, values=W, **changes)
        return net
    return project


def _hard_phase(result: CompressionResult, dataset: Dataset, config: TrainConfig, layers: Sequence[int],
                stage: str, *, s: Optional[float] = None, quant: Optional[QuantSpec] = None,
                fixed_masks: Optional[Dict[int, np.ndarray]] = None,
                eval_dataset: Optional[Dataset] = None) -> None:
    projector = _projector(layers, s, quant, fixed_masks)
    net = projector(result.net)
    sgd_mask = _layer_masks(net, fixed_masks) if fixed_masks else None
    net, history = train(net, dataset, config, epochs=config.epochs_hard, mask=sgd_mask, projector=projector,
                         eval_dataset=eval_dataset, stage=stage, epoch_offset=result.next_epoch)
    result.history.extend(history)
    result.next_epoch += config.epochs_hard
    result.net = net


def _layers(net: SpikingNetwork, layers: Optional[Sequence[int]]) -> List[int]:
    return list(compressible_layers(net.num_layers) if layers is None else layers)


@log_decorator("admm_prune")
def admm_prune(net: SpikingNetwork, dataset: Dataset, s: float, config: TrainConfig, *,
               rho: float = 5e-4, layers: Optional[Sequence[int]] = None,
               eval_dataset: Optional[Dataset] = None, start_epoch: int = 0) -> CompressionResult:
    """
    ADMM connection pruning followed by hard-pruning retraining.

    Args:
        net: pretrained network
        dataset: training split
        s: target sparsity per compressed layer
        config: N_1 and N_2 come from ``epochs_admm`` / ``epochs_hard``
        rho: ADMM penalty
        layers: layers to compress (default: all but first and last)
        eval_dataset: optional split evaluated after every epoch
        start_epoch: global epoch counter to continue from

    Returns:
        CompressionResult: the pruned network, its history and ADMM diagnostics
    """
    if not 0.0 <= s < 1.0:
        raise RangeError(f"sparsity must lie in [0, 1), got {s}")
    layers = _layers(net, layers)
    result = CompressionResult(net=net, next_epoch=start_epoch)
    logger.info(f"ADMM pruning layers {layers} to sparsity {s}")
    _admm_phase(result, dataset, config, layers, _prune_projection(s), rho, "admm_prune",
                sparsity=s, eval_dataset=eval_dataset)
    _hard_phase(result, dataset, config, layers, "hard_prune", s=s, eval_dataset=eval_dataset)
    return result


@log_decorator("admm_quantize")
def admm_quantize(net: SpikingNetwork, dataset: Dataset, spec: QuantSpec, config: TrainConfig, *,
                  rho: float = 5e-4, layers: Optional[Sequence[int]] = None,
                  eval_dataset: Optional[Dataset] = None, start_epoch: int = 0) -> CompressionResult:
    """
    ADMM weight quantization followed by hard-quantization retraining.

    The scale alpha is re-fit by every projection; the final one is stored
    on each compressed layer.
    """
    layers = _layers(net, layers)
    result = CompressionResult(net=net, next_epoch=start_epoch)
    logger.info(f"ADMM quantizing layers {layers} to {spec.bitwidth} bits")
    _admm_phase(result, dataset, config, layers, _quant_projection(spec), rho, "admm_quantize",
                quant=spec, eval_dataset=eval_dataset)
    _hard_phase(result, dataset, config, layers, "hard_quantize", quant=spec, eval_dataset=eval_dataset)
    return result


@log_decorator("admm_joint")
def admm_joint(net: SpikingNetwork, dataset: Dataset, s: float, spec: QuantSpec, config: TrainConfig, *,
               rho: float = 5e-4, layers: Optional[Sequence[int]] = None,
               eval_dataset: Optional[Dataset] = None, start_epoch: int = 0) -> CompressionResult:
    """
    Pruning then quantization inside the pruned support.

    Step I runs ``admm_prune`` and freezes its mask. Step II is ADMM
    quantization with updates restricted to the mask. Step III is hard
    retraining that masks and quantizes after every update.
    """
    layers = _layers(net, layers)
    result = admm_prune(net, dataset, s, config, rho=rho, layers=layers,
                        eval_dataset=eval_dataset, start_epoch=start_epoch)
    masks = {i: result.net.layers[i].mask for i in layers}

    _admm_phase(result, dataset, config, layers, _quant_projection(spec, masks), rho, "admm_joint",
                sparsity=s, quant=spec, masks=masks, eval_dataset=eval_dataset)
    _hard_phase(result, dataset, config, layers, "hard_joint", quant=spec, fixed_masks=masks,
                eval_dataset=eval_dataset)
    return result


@log_decorator("hard_compress")
def hard_compress(net: SpikingNetwork, dataset: Dataset, spec: CompressionSpec, config: TrainConfig, *,
                  layers: Optional[Sequence[int]] = None, eval_dataset: Optional[Dataset] = None,
                  start_epoch: int = 0) -> CompressionResult:
    """
    Projected retraining without any ADMM phase, for N_2 epochs.

    With both sparsity and bitwidth set, the pruning mask is taken from the
    starting weights and kept fixed while quantizing, as in the last step
    of the joint ADMM schedule.
    """
    if spec.sparsity is None and spec.bitwidth is None:
        raise RangeError("hard compression needs a sparsity, a bitwidth, or both")
    layers = _layers(net, layers)
    result = CompressionResult(net=net, next_epoch=start_epoch)
    fixed_masks = None
    s = spec.sparsity
    if spec.sparsity is not None and spec.quant is not None:
        fixed_masks = {i: prune_project(net.weights[i], spec.sparsity)[1] for i in layers}
        s = None
    logger.info(f"Hard compression of layers {layers}: s={spec.sparsity} b={spec.bitwidth}")
    _hard_phase(result, dataset, config, layers, "hard_compress", s=s, quant=spec.quant,
                fixed_masks=fixed_masks, eval_dataset=eval_dataset)
    return result
