import math

import numpy as np
import pytest

from channel_model import ChannelRealization, SystemConfig, noise_power_dbm
from self_check import random_channel
from system_model import (
    DegenerateChannelError, LinkBudget, PhaseVector, average_metric, dbm_to_mw,
    effective_channel, instantaneous_rate, instantaneous_snr, link_budget,
    mrt_beamformer, normalize_realization,
)


def _chan(h_stack):
    h_stack = np.asarray(h_stack, dtype=complex)
    nk = h_stack.shape[0]
    return ChannelRealization(h_stack=h_stack, per_ris_g=h_stack[None, :, :],
                              per_ris_h=np.ones((1, nk), dtype=complex))


def test_phase_vector_rejects_non_unit_modulus():
    with pytest.raises(ValueError):
        PhaseVector(np.array([1.0, 0.5]))


def test_phase_vector_keeps_raw_phases():
    phi = np.array([0.3, 7.0])
    vec = PhaseVector.from_phi(phi)
    np.testing.assert_array_equal(vec.phi, phi)
    np.testing.assert_allclose(vec.theta, np.exp(1j * phi))
    assert len(vec) == 2


def test_link_budget_from_config():
    config = SystemConfig(M=1, K=1, N=1, rician_factor=0.0, tx_power_dbm=10.0)
    expected = 10.0 ** ((10.0 - noise_power_dbm(config)) / 10.0)
    assert link_budget(config).snr_scale == pytest.approx(expected, rel=1e-12)
    assert dbm_to_mw(0.0) == 1.0


def test_link_budget_is_ratio_of_linear_powers():
    config = SystemConfig(M=1, K=1, N=1, rician_factor=0.0, tx_power_dbm=-5.0)
    ratio = dbm_to_mw(-5.0) / dbm_to_mw(noise_power_dbm(config))
    assert link_budget(config).snr_scale == ratio
    assert dbm_to_mw(20.0) == pytest.approx(100.0, rel=1e-12)


def test_link_budget_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        LinkBudget(snr_scale=0.0)


def test_mrt_single_antenna_normalizes_scalar():
    c = 0.6 - 0.8j
    chan = _chan([[c]])
    w = mrt_beamformer(PhaseVector(np.array([1.0 + 0j])), chan, tx_power_linear=4.0)
    np.testing.assert_allclose(w, [2.0 * np.conj(c) / abs(c)])


def test_mrt_has_transmit_power_and_aligns(rng):
    chan = random_channel(rng, 6, 3)
    theta = PhaseVector.from_phi(rng.uniform(0, 2 * np.pi, 6))
    w = mrt_beamformer(theta, chan, tx_power_linear=2.5)
    assert np.linalg.norm(w) ** 2 == pytest.approx(2.5)
    received = effective_channel(theta, chan) @ w
    assert abs(received) ** 2 == pytest.approx(2.5 * instantaneous_snr(theta, chan))


def test_mrt_zero_channel_raises():
    with pytest.raises(DegenerateChannelError):
        mrt_beamformer(PhaseVector(np.ones(2, dtype=complex)), _chan(np.zeros((2, 2))), 1.0)


def test_rate_of_zero_channel_is_zero():
    chan = _chan(np.zeros((3, 2)))
    theta = PhaseVector(np.ones(3, dtype=complex))
    assert instantaneous_rate(theta, chan, LinkBudget(1.0)) == 0.0
    assert instantaneous_snr(theta, chan) == 0.0


def test_rate_scalar_case_is_one_bit():
    chan = _chan([[1.0]])
    assert instantaneous_rate(PhaseVector(np.array([1j])), chan, LinkBudget(1.0)) == pytest.approx(1.0)


def test_snr_matches_quadratic_form(rng):
    chan = random_channel(rng, 5, 4)
    theta = PhaseVector.from_phi(rng.uniform(0, 2 * np.pi, 5))
    h = chan.h_stack
    quad = np.real(np.conj(theta.theta) @ h @ np.conj(h.T) @ theta.theta)
    assert instantaneous_snr(theta, chan) == pytest.approx(quad, rel=1e-12)


def test_average_metric_single_and_duplicated(rng):
    chan = random_channel(rng, 4, 2)
    theta = PhaseVector.from_phi(rng.uniform(0, 2 * np.pi, 4))
    budget = LinkBudget(3.0)
    single = average_metric(theta, [chan], 'rate', budget)
    assert single == instantaneous_rate(theta, chan, budget)
    assert average_metric(theta, [chan] * 7, 'rate', budget) == pytest.approx(single, rel=1e-15)
    assert average_metric(theta, [chan], 'snr') == instantaneous_snr(theta, chan)


def test_average_metric_errors(rng):
    theta = PhaseVector(np.ones(2, dtype=complex))
    with pytest.raises(ValueError):
        average_metric(theta, [], 'snr')
    with pytest.raises(ValueError):
        average_metric(theta, [random_channel(rng, 2, 1)], 'rate')
    with pytest.raises(ValueError):
        average_metric(theta, [random_channel(rng, 2, 1)], 'capacity')


def test_normalized_channel_gives_linear_snr(rng):
    chan = random_channel(rng, 4, 2)
    theta = PhaseVector.from_phi(rng.uniform(0, 2 * np.pi, 4))
    budget = LinkBudget(250.0)
    normalized = normalize_realization(chan, budget)
    assert instantaneous_snr(theta, normalized) == pytest.approx(250.0 * instantaneous_snr(theta, chan))
    expected_rate = math.log2(1.0 + instantaneous_snr(theta, normalized))
    assert instantaneous_rate(theta, chan, budget) == pytest.approx(expected_rate, rel=1e-12)


def test_rate_invariant_to_global_phase_rotation(rng):
    budget = LinkBudget(40.0)
    for _ in range(50):
        nk, m = int(rng.integers(1, 9)), int(rng.integers(1, 5))
        chan = random_channel(rng, nk, m)
        theta = PhaseVector.from_phi(rng.uniform(0, 2 * np.pi, nk))
        rotated = PhaseVector(np.exp(1j * rng.uniform(0, 2 * np.pi)) * theta.theta)
        expected = instantaneous_rate(theta, chan, budget)
        assert instantaneous_rate(rotated, chan, budget) == pytest.approx(expected, rel=1e-10)


def test_rate_nondecreasing_in_snr_scale(rng):
    chan = random_channel(rng, 6, 3)
    theta = PhaseVector.from_phi(rng.uniform(0, 2 * np.pi, 6))
    rates = [instantaneous_rate(theta, chan, LinkBudget(s)) for s in np.logspace(-4, 8, 60)]
    assert all(later >= earlier for earlier, later in zip(rates, rates[1:]))


def test_snr_bounded_by_sum_of_row_norms(rng):
    for _ in range(100):
        nk, m = int(rng.integers(1, 9)), int(rng.integers(1, 5))
        chan = random_channel(rng, nk, m)
        theta = PhaseVector.from_phi(rng.uniform(0, 2 * np.pi, nk))
        bound = np.sum(np.linalg.norm(chan.h_stack, axis=1)) ** 2
        assert instantaneous_snr(theta, chan) <= bound * (1.0 + 1e-12)
