"""
信道模型模块
生成长期信道统计量（快照）与逐时隙小尺度信道实现，优化器只通过采样接口访问信道
"""
import math
import numbers
from dataclasses import dataclass
from typing import Iterator, List, Sequence

import numpy as np

from config import (
    DEFAULT_BANDWIDTH_HZ, DEFAULT_DISTANCE_M, DEFAULT_NOISE_PSD_DBM_HZ,
    DEFAULT_NUM_PATHS, DEFAULT_TX_POWER_DBM, PATH_LOSS_INTERCEPT_DB,
    PATH_LOSS_SLOPE_DB,
)


class DimensionMismatchError(ValueError):
    """快照与系统配置的维度不一致"""


# 子随机流名称 -> 固定编号，新增消费者只能追加，不能改已有编号
RNG_STREAMS = {
    'snapshot': 1,
    'realization': 2,
    'baseline': 3,
    'training': 4,
    'init': 5,
    'selftest': 6,
}


def make_rng(seed: int, stream: str, *indices: int) -> np.random.Generator:
    """
    从主种子派生独立的命名子随机流

    Args:
        seed: 主种子
        stream: 子流名称（见 RNG_STREAMS）
        *indices: 附加的非负整数索引（如快照编号、扫描点编号）

    Returns:
        numpy 随机数生成器
    """
    if stream not in RNG_STREAMS:
        raise ValueError(f"未知的随机流名称: {stream}")
    if any(int(i) < 0 for i in indices):
        raise ValueError(f"随机流索引必须为非负整数: {indices}")
    seq = np.random.SeedSequence(
        entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=(RNG_STREAMS[stream],) + tuple(int(i) for i in indices),
    )
    return np.random.default_rng(seq)


def numeric_field_errors(obj, names: Sequence[str]) -> List[str]:
    """列出不是实数的字段（bool 不算数值），用于在比较前报告类型错误"""
    errors = []
    for name in names:
        value = getattr(obj, name)
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            errors.append(f"{name} 必须为数值，当前: {value!r} ({type(value).__name__})")
    return errors


@dataclass
class SystemConfig:
    """系统参数：天线数、RIS 数量、每个 RIS 的单元数以及链路预算"""

    M: int
    K: int
    N: int
    rician_factor: float
    num_paths: int = DEFAULT_NUM_PATHS
    distance_m: float = DEFAULT_DISTANCE_M
    bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ
    noise_psd_dbm_hz: float = DEFAULT_NOISE_PSD_DBM_HZ
    tx_power_dbm: float = DEFAULT_TX_POWER_DBM

    def __post_init__(self):
        errors = numeric_field_errors(self, (
            'M', 'K', 'N', 'rician_factor', 'num_paths', 'distance_m',
            'bandwidth_hz', 'noise_psd_dbm_hz', 'tx_power_dbm',
        ))
        if errors:
            raise ValueError("系统配置无效: " + "; ".join(errors))

        for name in ('M', 'K', 'N', 'num_paths'):
            value = getattr(self, name)
            if not float(value).is_integer() or value < 1:
                errors.append(f"{name} 必须为正整数，当前: {value}")
        if not self.rician_factor >= 0:
            errors.append(f"rician_factor 必须 >= 0，当前: {self.rician_factor}")
        if not self.bandwidth_hz > 0:
            errors.append(f"bandwidth_hz 必须 > 0，当前: {self.bandwidth_hz}")
        if not self.distance_m > 0:
            errors.append(f"distance_m 必须 > 0，当前: {self.distance_m}")
        if errors:
            raise ValueError("系统配置无效: " + "; ".join(errors))

    @property
    def nk(self) -> int:
        """RIS 单元总数 NK"""
        return self.N * self.K

    def to_dict(self) -> dict:
        """转换为字典"""
        return {
            'M': self.M,
            'K': self.K,
            'N': self.N,
            'rician_factor': self.rician_factor,
            'num_paths': self.num_paths,
            'distance_m': self.distance_m,
            'bandwidth_hz': self.bandwidth_hz,
            'noise_psd_dbm_hz': self.noise_psd_dbm_hz,
            'tx_power_dbm': self.tx_power_dbm,
        }


@dataclass
class Snapshot:
    """
    一次长期信道几何的抽样

    aoa_ris / aod_ap 形状 (K,)，user_path_angles 与 path_gain_vars 形状 (K, L)，
    los_components 形状 (K, N, M)。
    """

    aoa_ris: np.ndarray
    aod_ap: np.ndarray
    user_path_angles: np.ndarray
    path_gain_vars: np.ndarray
    los_components: np.ndarray


@dataclass
class ChannelRealization:
    """
    一个时隙的信道实现

    h_stack 形状 (N*K, M)，第 k 个行块为 diag(h_k^H) G_k；
    per_ris_g 形状 (K, N, M)，per_ris_h 形状 (K, N)。
    """

    h_stack: np.ndarray
    per_ris_g: np.ndarray
    per_ris_h: np.ndarray

    @property
    def nk(self) -> int:
        return self.h_stack.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.h_stack.shape[1]


def stack_effective_channel(per_ris_g: np.ndarray, per_ris_h: np.ndarray) -> np.ndarray:
    """把 K 个 diag(h_k^H) G_k 行块堆叠成 (NK, M) 的等效信道"""
    K, N, M = per_ris_g.shape
    blocks = np.conj(per_ris_h)[:, :, None] * per_ris_g
    return blocks.reshape(K * N, M)


def ula_steering(n_elems: int, angle: float) -> np.ndarray:
    """
    均匀线阵响应 α_n(φ) = [1, e^{jπ sin φ}, ..., e^{jπ(n-1) sin φ}]

    Args:
        n_elems: 阵元数
        angle: 角度（弧度）

    Returns:
        长度为 n_elems 的复向量，各元素模为 1
    """
    if n_elems < 1:
        raise ValueError(f"阵元数必须 >= 1，当前: {n_elems}")
    return np.exp(1j * np.pi * np.arange(n_elems) * np.sin(angle))


def _uniform_angles(rng: np.random.Generator, size) -> np.ndarray:
    # 1 - U[0,1) 落在 (0,1]，对应角度区间 (0, 2π]
    return 2.0 * np.pi * (1.0 - rng.random(size))


def sample_snapshot(config: SystemConfig, rng: np.random.Generator) -> Snapshot:
    """
    抽取一个快照：到达角/离开角/用户侧路径角、路径功率分布以及 LoS 分量

    Args:
        config: 系统配置
        rng: 随机数生成器

    Returns:
        Snapshot 对象
    """
    K, L = config.K, config.num_paths
    aoa = _uniform_angles(rng, K)
    aod = _uniform_angles(rng, K)
    path_angles = _uniform_angles(rng, (K, L))

    # 指数分布抽样后按 RIS 归一化
    raw = rng.exponential(1.0, size=(K, L))
    path_vars = raw / raw.sum(axis=1, keepdims=True)

    los = np.stack([
        np.outer(ula_steering(config.N, aoa[k]), np.conj(ula_steering(config.M, aod[k])))
        for k in range(K)
    ])
    return Snapshot(
        aoa_ris=aoa,
        aod_ap=aod,
        user_path_angles=path_angles,
        path_gain_vars=path_vars,
        los_components=los,
    )


def _check_dimensions(snapshot: Snapshot, config: SystemConfig):
    expected = {
        'aoa_ris': (config.K,),
        'aod_ap': (config.K,),
        'user_path_angles': (config.K, config.num_paths),
        'path_gain_vars': (config.K, config.num_paths),
        'los_components': (config.K, config.N, config.M),
    }
    problems = [
        f"{name}: 期望 {shape}，实际 {np.shape(getattr(snapshot, name))}"
        for name, shape in expected.items()
        if np.shape(getattr(snapshot, name)) != shape
    ]
    if problems:
        raise DimensionMismatchError("快照与系统配置维度不一致: " + "; ".join(problems))


def _rician_weights(rician_factor: float):
    if math.isinf(rician_factor):
        return 1.0, 0.0
    return (math.sqrt(rician_factor / (rician_factor + 1.0)),
            math.sqrt(1.0 / (rician_factor + 1.0)))


def sample_realization(snapshot: Snapshot, config: SystemConfig,
                       rng: np.random.Generator,
                       apply_path_loss: bool = True) -> ChannelRealization:
    """
    在给定快照下抽取一个小尺度衰落实现

    AP-RIS 信道为莱斯衰落 G_k = √(ρ/(ρ+1)) Ḡ_k + √(1/(ρ+1)) G̃_k，
    RIS-用户信道为 L 径 h_k = Σ_l β_{l,k} α_N(φ_{l,k})。
    路径损耗按幅度分别作用于 G_k 和 h_k 两跳。

    Args:
        snapshot: 快照
        config: 系统配置
        rng: 随机数生成器
        apply_path_loss: 是否施加路径损耗（测试中用于检查归一化统计量）

    Returns:
        ChannelRealization 对象

    Raises:
        DimensionMismatchError: 快照与配置维度不一致
    """
    _check_dimensions(snapshot, config)
    K, N, M, L = config.K, config.N, config.M, config.num_paths

    g_tilde = (rng.standard_normal((K, N, M)) + 1j * rng.standard_normal((K, N, M))) / math.sqrt(2.0)
    w_los, w_nlos = _rician_weights(config.rician_factor)
    g = w_los * snapshot.los_components + w_nlos * g_tilde

    beta_std = np.sqrt(snapshot.path_gain_vars / 2.0)
    beta = beta_std * (rng.standard_normal((K, L)) + 1j * rng.standard_normal((K, L)))
    # steering[k, l, :] = α_N(φ_{l,k})
    steering = np.exp(1j * np.pi * np.arange(N)[None, None, :]
                      * np.sin(snapshot.user_path_angles)[:, :, None])
    h = np.einsum('kl,kln->kn', beta, steering)

    if apply_path_loss:
        amplitude = 10.0 ** (-path_loss_db(config.distance_m) / 20.0)
        g = g * amplitude
        h = h * amplitude

    return ChannelRealization(
        h_stack=stack_effective_channel(g, h),
        per_ris_g=g,
        per_ris_h=h,
    )


def realization_stream(snapshot: Snapshot, config: SystemConfig,
                       rng: np.random.Generator, count: int) -> Iterator[ChannelRealization]:
    """按需逐个产生 count 个信道实现"""
    for _ in range(count):
        yield sample_realization(snapshot, config, rng)


def path_loss_db(distance_m: float) -> float:
    """
    路径损耗 38.46 + 20 lg d (dB)

    Raises:
        ValueError: 距离非正
    """
    if not distance_m > 0:
        raise ValueError(f"距离必须 > 0，当前: {distance_m}")
    return PATH_LOSS_INTERCEPT_DB + PATH_LOSS_SLOPE_DB * math.log10(distance_m)


def noise_power_dbm(config: SystemConfig) -> float:
    """噪声功率 = 噪声功率谱密度 + 10 lg(带宽)"""
    return config.noise_psd_dbm_hz + 10.0 * math.log10(config.bandwidth_hz)
