import numpy as np
import pytest

from channel_model import (
    DimensionMismatchError, SystemConfig, make_rng, noise_power_dbm, path_loss_db,
    realization_stream, sample_realization, sample_snapshot, stack_effective_channel,
    ula_steering,
)


def test_ula_steering_broadside_is_all_ones():
    np.testing.assert_allclose(ula_steering(4, 0.0), np.ones(4))


def test_ula_steering_endfire_alternates():
    np.testing.assert_allclose(ula_steering(2, np.pi / 2), [1.0, -1.0], atol=1e-12)


def test_ula_steering_unit_modulus(rng):
    for angle in rng.uniform(0, 2 * np.pi, 20):
        vec = ula_steering(16, angle)
        assert np.max(np.abs(np.abs(vec) - 1.0)) <= 1e-12


def test_ula_steering_rejects_empty_array():
    with pytest.raises(ValueError):
        ula_steering(0, 0.1)


@pytest.mark.parametrize('distance, expected', [(10.0, 58.46), (1.0, 38.46), (100.0, 78.46)])
def test_path_loss_db(distance, expected):
    assert path_loss_db(distance) == pytest.approx(expected, abs=1e-9)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss_db(0.0)


@pytest.mark.parametrize('bandwidth, psd, expected', [
    (2e5, -170.0, -116.9897),
    (1.0, -170.0, -170.0),
    (1e6, -170.0, -110.0),
])
def test_noise_power_dbm(bandwidth, psd, expected):
    config = SystemConfig(M=1, K=1, N=1, rician_factor=0.0, bandwidth_hz=bandwidth, noise_psd_dbm_hz=psd)
    assert noise_power_dbm(config) == pytest.approx(expected, abs=1e-4)


def test_system_config_rejects_invalid_values():
    with pytest.raises(ValueError):
        SystemConfig(M=0, K=1, N=1, rician_factor=1.0)
    with pytest.raises(ValueError):
        SystemConfig(M=1, K=1, N=1, rician_factor=-1.0)


def test_make_rng_streams_are_reproducible_and_distinct():
    a = make_rng(7, 'snapshot', 0, 3).random(5)
    b = make_rng(7, 'snapshot', 0, 3).random(5)
    c = make_rng(7, 'realization', 0, 3).random(5)
    d = make_rng(7, 'snapshot', 0, 4).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_make_rng_rejects_unknown_stream():
    with pytest.raises(ValueError):
        make_rng(1, 'bogus')


def test_snapshot_single_path_has_unit_variance(rng):
    config = SystemConfig(M=2, K=3, N=4, rician_factor=1.0, num_paths=1)
    snapshot = sample_snapshot(config, rng)
    np.testing.assert_array_equal(snapshot.path_gain_vars, np.ones((3, 1)))


def test_snapshot_invariants(rng, small_config):
    for _ in range(200):
        snapshot = sample_snapshot(small_config, rng)
        assert snapshot.aoa_ris.shape == (small_config.K,)
        assert snapshot.user_path_angles.shape == (small_config.K, small_config.num_paths)
        assert np.all(snapshot.aoa_ris > 0) and np.all(snapshot.aoa_ris <= 2 * np.pi)
        assert np.all(snapshot.path_gain_vars > 0)
        np.testing.assert_allclose(snapshot.path_gain_vars.sum(axis=1), 1.0, atol=1e-12)
        assert snapshot.los_components.shape == (small_config.K, small_config.N, small_config.M)
        assert np.max(np.abs(np.abs(snapshot.los_components) - 1.0)) <= 1e-12


def test_realization_stacking_identity(rng, small_config):
    snapshot = sample_snapshot(small_config, rng)
    chan = sample_realization(snapshot, small_config, rng)
    assert chan.h_stack.shape == (small_config.nk, small_config.M)
    rebuilt = np.vstack([np.diag(np.conj(chan.per_ris_h[k])) @ chan.per_ris_g[k]
                         for k in range(small_config.K)])
    np.testing.assert_allclose(chan.h_stack, rebuilt, rtol=1e-12, atol=0)
    np.testing.assert_array_equal(stack_effective_channel(chan.per_ris_g, chan.per_ris_h), chan.h_stack)


def test_realization_rejects_mismatched_snapshot(rng, small_config):
    snapshot = sample_snapshot(small_config, rng)
    other = SystemConfig(M=3, K=2, N=4, rician_factor=10.0)
    with pytest.raises(DimensionMismatchError):
        sample_realization(snapshot, other, rng)


def test_strong_los_limit_matches_los_component(rng):
    config = SystemConfig(M=3, K=2, N=5, rician_factor=1e12)
    snapshot = sample_snapshot(config, rng)
    chan = sample_realization(snapshot, config, rng, apply_path_loss=False)
    rel = np.abs(chan.per_ris_g - snapshot.los_components) / np.abs(snapshot.los_components)
    assert np.max(rel) <= 1e-4


def test_path_loss_applied_to_each_hop(small_config):
    snapshot = sample_snapshot(small_config, make_rng(1, 'snapshot', 0))
    raw = sample_realization(snapshot, small_config, make_rng(1, 'realization', 0), apply_path_loss=False)
    lossy = sample_realization(snapshot, small_config, make_rng(1, 'realization', 0))
    amplitude = 10.0 ** (-path_loss_db(small_config.distance_m) / 20.0)
    np.testing.assert_allclose(lossy.per_ris_g, raw.per_ris_g * amplitude, rtol=1e-12)
    np.testing.assert_allclose(lossy.per_ris_h, raw.per_ris_h * amplitude, rtol=1e-12)
    np.testing.assert_allclose(lossy.h_stack, raw.h_stack * amplitude ** 2, rtol=1e-12)


def test_nlos_entries_have_unit_variance(rng):
    # ρ = 0 时 G_k 就是 G̃_k
    config = SystemConfig(M=10, K=1, N=10, rician_factor=0.0)
    snapshot = sample_snapshot(config, rng)
    samples = np.concatenate([
        sample_realization(snapshot, config, rng, apply_path_loss=False).per_ris_g.ravel()
        for _ in range(2000)
    ])
    variance = float(np.mean(np.abs(samples) ** 2))
    assert 0.99 <= variance <= 1.01


def test_user_channel_energy_matches_element_count(rng):
    config = SystemConfig(M=1, K=5, N=8, rician_factor=1.0)
    snapshot = sample_snapshot(config, rng)
    energies = [
        np.sum(np.abs(sample_realization(snapshot, config, rng, apply_path_loss=False).per_ris_h) ** 2, axis=1)
        for _ in range(20000)
    ]
    mean_energy = float(np.mean(energies))
    assert mean_energy == pytest.approx(config.N, rel=0.02)


def test_realization_stream_yields_count(rng, small_config):
    snapshot = sample_snapshot(small_config, rng)
    items = list(realization_stream(snapshot, small_config, rng, 7))
    assert len(items) == 7
    assert not np.array_equal(items[0].h_stack, items[1].h_stack)
