"""
Leaky integrate-and-fire dynamics in iterative form.

Each neuron keeps a membrane potential ``u`` and a binary output ``o``.
One step decays the carried potential, drops it entirely if the neuron
fired on the previous step, adds the weighted input and fires when the
threshold is reached:

    u' = decay * u * (1 - o) + x
    o' = H(u' - u_th)

Resting and reset potentials are both zero and there is no integration
window beyond a single step.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError, NumericError, RangeError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class LifParams:
    """
    Neuron constants.

    Args:
        decay: membrane decay factor e^{-dt/tau}, in [0, 1]
        u_th: firing threshold
        surrogate_width: width ``a`` of the boxcar surrogate derivative
        relaxed: use the continuous ramp instead of the Heaviside spike.
            Only meant for gradient checking.
    """
    decay: float = 0.25
    u_th: float = 0.2
    surrogate_width: float = 0.5
    relaxed: bool = False

    def __post_init__(self):
        if not 0.0 <= self.decay <= 1.0:
            raise RangeError(f"decay must lie in [0, 1], got {self.decay}")
        if not self.u_th > 0.0:
            raise RangeError(f"u_th must be positive, got {self.u_th}")
        if not self.surrogate_width > 0.0:
            raise RangeError(f"surrogate_width must be positive, got {self.surrogate_width}")


@dataclass(frozen=True)
class NeuronState:
    """Membrane potentials ``u`` and spikes ``o`` of one population."""
    u: np.ndarray
    o: np.ndarray

    def __post_init__(self):
        if np.shape(self.u) != np.shape(self.o):
            raise DimensionError(f"u shape {np.shape(self.u)} != o shape {np.shape(self.o)}")

    @classmethod
    def zeros(cls, shape) -> "NeuronState":
        return cls(u=np.zeros(shape), o=np.zeros(shape))


def _check_finite(x: ArrayLike) -> None:
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite value passed to the spike function")


def heaviside(x: ArrayLike) -> ArrayLike:
    """Step function with H(0) = 1. Works elementwise on arrays."""
    _check_finite(x)
    out = np.where(np.asarray(x) >= 0.0, 1.0, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def ramp(u: ArrayLike, params: LifParams) -> ArrayLike:
    """Piecewise-linear relaxation of the spike whose derivative is exactly the boxcar."""
    _check_finite(u)
    a = params.surrogate_width
    out = np.clip((np.asarray(u, dtype=float) - params.u_th + a / 2.0) / a, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def spike(u: ArrayLike, params: LifParams) -> ArrayLike:
    """Spike output for membrane potential ``u``, honouring ``params.relaxed``."""
    if params.relaxed:
        return ramp(u, params)
    return heaviside(np.asarray(u, dtype=float) - params.u_th)


def surrogate_grad(u: ArrayLike, params: LifParams) -> ArrayLike:
    """
    Boxcar stand-in for do/du.

    Returns 1/a on the half-open window [u_th - a/2, u_th + a/2) and 0
    elsewhere, so the pulse has unit mass.
    """
    _check_finite(u)
    a = params.surrogate_width
    u = np.asarray(u, dtype=float)
    inside = (u >= params.u_th - a / 2.0) & (u < params.u_th + a / 2.0)
    out = np.where(inside, 1.0 / a, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def lif_step(state: NeuronState, weighted_input: np.ndarray, params: LifParams) -> NeuronState:
    """
    Advance one population by a single timestep.

    Args:
        state: potentials and spikes from the previous step
        weighted_input: dendritic sum for the current step, same shape as the state
        params: neuron constants

    Returns:
        NeuronState: the new potentials and spikes
    """
    weighted_input = np.asarray(weighted_input, dtype=float)
    if weighted_input.shape != np.shape(state.u):
        raise DimensionError(
            f"weighted input shape {weighted_input.shape} does not match state shape {np.shape(state.u)}"
        )
    u = params.decay * state.u * (1.0 - state.o) + weighted_input
    o = spike(u, params)
    return NeuronState(u=np.asarray(u, dtype=float), o=np.asarray(o, dtype=float))
