import numpy as np
import pytest

from snn.errors import DimensionError, NumericError, RangeError
from snn.lif import LifParams, NeuronState, heaviside, lif_step, ramp, spike, surrogate_grad


def step(u, o, x, params):
    return lif_step(NeuronState(np.array([u]), np.array([o])), np.array([x]), params)


def test_input_above_threshold_fires(params):
    state = step(0.0, 0.0, 0.3, params)
    assert state.u[0] == pytest.approx(0.3)
    assert state.o[0] == 1.0


def test_threshold_is_inclusive(params):
    assert step(0.0, 0.0, params.u_th, params).o[0] == 1.0


def test_spike_resets_carried_potential(params):
    state = step(0.3, 1.0, 0.0, params)
    assert state.u[0] == 0.0
    assert state.o[0] == 0.0


def test_potential_decays(params):
    state = step(0.1, 0.0, 0.05, params)
    assert state.u[0] == pytest.approx(0.25 * 0.1 + 0.05)
    assert state.o[0] == 0.0


def test_quiescent_neurons_stay_silent(params):
    state = NeuronState.zeros((3, 4))
    for _ in range(20):
        state = lif_step(state, np.zeros((3, 4)), params)
    assert not state.u.any()
    assert not state.o.any()


def test_spikes_match_heaviside_of_potential(params):
    rng = np.random.default_rng(3)
    state = NeuronState.zeros(50)
    for _ in range(10):
        state = lif_step(state, rng.uniform(-0.3, 0.5, 50), params)
        np.testing.assert_array_equal(state.o, (state.u >= params.u_th).astype(float))


def test_shape_mismatch_raises(params):
    with pytest.raises(DimensionError):
        lif_step(NeuronState.zeros(3), np.zeros(4), params)


def test_heaviside_rejects_nan():
    with pytest.raises(NumericError):
        heaviside(np.array([0.0, np.nan]))


def test_heaviside_scalar():
    assert heaviside(0.0) == 1.0
    assert heaviside(-1e-12) == 0.0


def test_surrogate_window_is_half_open(params):
    a = params.surrogate_width
    lower = params.u_th - a / 2.0
    upper = params.u_th + a / 2.0
    assert surrogate_grad(lower, params) == pytest.approx(1.0 / a)
    assert surrogate_grad(upper, params) == 0.0
    assert surrogate_grad(params.u_th, params) == pytest.approx(2.0)
    assert surrogate_grad(1.0, params) == 0.0


def test_surrogate_has_unit_mass(params):
    grid, step_size = np.linspace(-1.0, 1.5, 25001, retstep=True)
    mass = float(np.sum(surrogate_grad(grid, params)) * step_size)
    assert mass == pytest.approx(1.0, abs=1e-3)


def test_relaxed_spike_is_ramp():
    relaxed = LifParams(relaxed=True)
    u = np.array([-1.0, 0.0, 0.2, 0.3, 2.0])
    np.testing.assert_allclose(spike(u, relaxed), [0.0, 0.1, 0.5, 0.7, 1.0])
    np.testing.assert_allclose(spike(u, relaxed), ramp(u, relaxed))


@pytest.mark.parametrize("kwargs", [{"decay": 1.5}, {"u_th": 0.0}, {"surrogate_width": -0.1}])
def test_invalid_params_raise(kwargs):
    with pytest.raises(RangeError):
        LifParams(**kwargs)
