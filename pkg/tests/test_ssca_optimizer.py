import itertools

import numpy as np
import pytest

from channel_model import ChannelRealization, SystemConfig, sample_realization, sample_snapshot
from optimizer_trace import STOP_CONVERGED, STOP_MAX_ITERS, STOP_TRUNCATED
from self_check import finite_difference_grad, random_channel
from ssca_optimizer import (
    SSCA_TRACE_COLUMNS, SscaParams, SscaState, grad_rate_phi, grad_rate_theta,
    run_ssca, ssca_step, surrogate_minimizer, surrogate_value, update_gradient_estimate,
)
from system_model import LinkBudget, PhaseVector, instantaneous_rate


def _zero_chan(nk, m):
    h = np.zeros((nk, m), dtype=complex)
    return ChannelRealization(h_stack=h, per_ris_g=h[None, :, :], per_ris_h=np.ones((1, nk), dtype=complex))


def test_params_validation():
    with pytest.raises(ValueError):
        SscaParams(beta=0.4)
    with pytest.raises(ValueError):
        SscaParams(alpha=0.5, beta=0.6)
    with pytest.raises(ValueError):
        SscaParams(tau=0.0)


def test_gradient_of_zero_channel_is_zero():
    theta = PhaseVector(np.ones(3, dtype=complex))
    np.testing.assert_array_equal(grad_rate_theta(theta, _zero_chan(3, 2), LinkBudget(5.0)), np.zeros(3))
    np.testing.assert_array_equal(grad_rate_phi(np.zeros(3), _zero_chan(3, 2), LinkBudget(5.0)), np.zeros(3))


def test_gradient_scalar_case():
    a = 3.0
    chan = ChannelRealization(h_stack=np.array([[np.sqrt(a)]], dtype=complex),
                              per_ris_g=np.array([[[np.sqrt(a)]]], dtype=complex),
                              per_ris_h=np.ones((1, 1), dtype=complex))
    grad = grad_rate_theta(PhaseVector(np.array([1.0 + 0j])), chan, LinkBudget(1.0))
    np.testing.assert_allclose(grad, [2 * a / (1 + a)])


def test_phase_gradient_matches_finite_differences(rng):
    for _ in range(20):
        nk = int(rng.integers(1, 9))
        m = int(rng.integers(1, 5))
        chan = random_channel(rng, nk, m)
        budget = LinkBudget(float(rng.uniform(0.1, 10.0)))
        phi = rng.uniform(0, 2 * np.pi, nk)
        analytic = grad_rate_phi(phi, chan, budget)
        numeric = finite_difference_grad(phi, chan, budget)
        assert np.linalg.norm(analytic - numeric) <= 1e-5 * max(np.linalg.norm(analytic), 1e-3)


def test_gradient_estimate_first_iteration_is_negated_sample():
    state = SscaState.initial(np.zeros(3))
    state.grad_est = np.array([5.0, -1.0, 2.0])
    sample = np.array([0.1, 0.2, 0.3])
    np.testing.assert_allclose(update_gradient_estimate(state, sample, SscaParams(), iteration=1), -sample)


def test_gradient_estimate_half_weight():
    # β = 0.5, i = 4 时 ρ = 1/2
    params = SscaParams(alpha=0.9, beta=0.5)
    g = np.array([1.0, -2.0])
    state = SscaState(phi=np.zeros(2), grad_est=g, iter=4)
    np.testing.assert_allclose(update_gradient_estimate(state, -g, params), g)


def test_gradient_estimate_tracks_constant_sample():
    c = np.array([0.5, -1.5])
    params = SscaParams()
    state = SscaState.initial(np.zeros(2))
    for i in range(1, 1001):
        state.grad_est = update_gradient_estimate(state, c, params, iteration=i)
    np.testing.assert_allclose(state.grad_est, -c, atol=1e-12)


def test_gradient_estimate_rejects_iteration_zero():
    with pytest.raises(ValueError):
        update_gradient_estimate(SscaState.initial(np.zeros(1)), np.zeros(1), SscaParams())


def test_surrogate_minimizer_examples():
    phi_prev = np.array([0.3, 1.2, -0.4])
    np.testing.assert_array_equal(surrogate_minimizer(phi_prev, np.zeros(3), 2.0), phi_prev)
    np.testing.assert_allclose(surrogate_minimizer(phi_prev, np.array([1.0, 0.0, 0.0]), 1.0),
                               phi_prev - np.array([1.0, 0.0, 0.0]))


def test_surrogate_minimizer_is_stationary(rng):
    phi_prev = rng.uniform(0, 2 * np.pi, 4)
    f = rng.standard_normal(4)
    best = surrogate_minimizer(phi_prev, f, 0.7)
    base = surrogate_value(best, phi_prev, f, 0.7)
    for _ in range(20):
        assert surrogate_value(best + 1e-3 * rng.standard_normal(4), phi_prev, f, 0.7) >= base


def test_first_step_lands_on_surrogate_minimizer(rng):
    chan = random_channel(rng, 4, 2)
    budget = LinkBudget(2.0)
    params = SscaParams()
    state = SscaState.initial(rng.uniform(0, 2 * np.pi, 4))
    new_state = ssca_step(state, chan, params, budget)
    expected = surrogate_minimizer(state.phi, -grad_rate_phi(state.phi, chan, budget), params.tau)
    np.testing.assert_allclose(new_state.phi, expected, rtol=1e-12)
    assert new_state.iter == 1


def test_zero_gradient_never_moves():
    phi0 = np.array([0.1, 0.2])
    chan = _zero_chan(2, 2)
    state = SscaState.initial(phi0)
    for _ in range(5):
        state = ssca_step(state, chan, SscaParams(), LinkBudget(1.0))
        np.testing.assert_allclose(state.phi, phi0, rtol=1e-15)
        assert state.last_surrogate_gap <= 1e-30


def test_max_iters_zero_returns_initial_phase():
    phi0 = np.array([0.4, 2.0, 5.5])
    theta, trace = run_ssca([], SscaParams(max_iters=0), LinkBudget(1.0), phi0)
    np.testing.assert_allclose(theta.theta, np.exp(1j * phi0))
    assert trace.iterations == 0
    assert trace.stop_reason == STOP_MAX_ITERS


def test_exhausted_stream_is_truncation(rng):
    chans = [random_channel(rng, 3, 2) for _ in range(4)]
    _, trace = run_ssca(chans, SscaParams(epsilon=1e-300, max_iters=10), LinkBudget(1.0), np.zeros(3))
    assert trace.stop_reason == STOP_TRUNCATED
    assert trace.iterations == 4
    assert trace.columns == SSCA_TRACE_COLUMNS


def test_deterministic_stream_reaches_grid_maximum(rng):
    config = SystemConfig(M=2, K=1, N=2, rician_factor=10.0)
    chan = sample_realization(sample_snapshot(config, rng), config, rng, apply_path_loss=False)
    budget = LinkBudget(1.0)
    params = SscaParams(tau=1.0, epsilon=1e-14, max_iters=5000)
    theta, trace = run_ssca(itertools.repeat(chan), params, budget, np.zeros(2))

    grid = np.exp(1j * 2 * np.pi * np.arange(360) / 360)
    thetas = np.array([[a, b] for a in grid for b in grid])
    eff = np.conj(thetas) @ chan.h_stack
    best_rate = np.log2(1.0 + np.max(np.sum(np.abs(eff) ** 2, axis=1)))
    assert instantaneous_rate(theta, chan, budget) >= 0.99 * best_rate
    assert trace.stop_reason in (STOP_CONVERGED, STOP_MAX_ITERS)


def test_same_inputs_give_identical_trace(rng):
    chans = [random_channel(rng, 4, 2) for _ in range(30)]
    params = SscaParams(max_iters=30, epsilon=1e-300)
    _, first = run_ssca(chans, params, LinkBudget(4.0), np.zeros(4))
    _, second = run_ssca(chans, params, LinkBudget(4.0), np.zeros(4))
    assert first.rows == second.rows


def test_params_reject_non_numeric_values():
    with pytest.raises(ValueError, match='tau 必须为数值'):
        SscaParams(tau='0.1')
    with pytest.raises(ValueError, match='max_iters 必须为非负整数'):
        SscaParams(max_iters=float('inf'))


def test_returned_rate_invariant_to_full_turns(rng):
    chans = [random_channel(rng, 5, 2) for _ in range(40)]
    budget = LinkBudget(10.0)
    theta, _ = run_ssca(chans, SscaParams(max_iters=40), budget, np.zeros(5))
    eval_chan = random_channel(rng, 5, 2)
    expected = instantaneous_rate(theta, eval_chan, budget)
    for n in range(5):
        shifted = theta.phi.copy()
        shifted[n] += 2 * np.pi * int(rng.integers(-3, 4))
        rate = instantaneous_rate(PhaseVector.from_phi(shifted), eval_chan, budget)
        assert rate == pytest.approx(expected, rel=1e-12)


def test_surrogate_minimizer_strictly_decreases_surrogate(rng):
    for _ in range(100):
        nk = int(rng.integers(1, 9))
        phi_prev = rng.uniform(0, 2 * np.pi, nk)
        grad_est = rng.standard_normal(nk)
        tau = float(rng.uniform(1e-3, 10.0))
        phi_hat = surrogate_minimizer(phi_prev, grad_est, tau)
        assert surrogate_value(phi_hat, phi_prev, grad_est, tau) < surrogate_value(phi_prev, phi_prev, grad_est, tau)
