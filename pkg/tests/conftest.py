"""测试公共夹具"""
import pytest

from channel_model import SystemConfig, make_rng


@pytest.fixture
def rng():
    return make_rng(12345, 'selftest', 99)


@pytest.fixture
def small_config():
    return SystemConfig(M=2, K=2, N=4, rician_factor=10.0)
