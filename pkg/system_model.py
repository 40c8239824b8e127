"""
信号模型模块
等效信道代数、MRT 波束成形、瞬时速率/信噪比以及蒙特卡洛平均
"""
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from channel_model import ChannelRealization, SystemConfig, noise_power_dbm
from config import UNIT_MODULUS_TOL


class DegenerateChannelError(ValueError):
    """等效信道 θ^H H 为零，无法归一化波束"""


class PhaseVector:
    """
    RIS 反射系数向量 θ（长度 NK，单位模），可选保存对应的相位 φ

    由相位构造时保存原始 φ（不做 2π 折叠），否则 φ 取 angle(θ)。
    """

    def __init__(self, theta: np.ndarray, phi: Optional[np.ndarray] = None):
        theta = np.asarray(theta, dtype=complex).ravel()
        if np.any(np.abs(np.abs(theta) - 1.0) > UNIT_MODULUS_TOL):
            raise ValueError("反射系数必须满足单位模约束 |θ_n| = 1")
        self.theta = theta
        self._phi = None if phi is None else np.asarray(phi, dtype=float).ravel()

    @classmethod
    def from_phi(cls, phi: np.ndarray) -> 'PhaseVector':
        """由相位向量 φ 构造 θ = e^{jφ}"""
        phi = np.asarray(phi, dtype=float).ravel()
        return cls(np.exp(1j * phi), phi=phi)

    @property
    def phi(self) -> np.ndarray:
        if self._phi is not None:
            return self._phi
        return np.angle(self.theta)

    def __len__(self):
        return self.theta.size

    def __repr__(self):
        return f"PhaseVector(nk={self.theta.size})"


@dataclass
class LinkBudget:
    """链路预算，把 P_T/σ_0² 折叠为一个线性标量"""

    snr_scale: float

    def __post_init__(self):
        if not self.snr_scale > 0:
            raise ValueError(f"snr_scale 必须 > 0，当前: {self.snr_scale}")


def dbm_to_mw(value_dbm: float) -> float:
    """dBm 转线性毫瓦"""
    return 10.0 ** (value_dbm / 10.0)


def link_budget(config: SystemConfig) -> LinkBudget:
    """由发射功率 (dBm) 与噪声功率 (dBm) 计算 snr_scale = P_T / σ²"""
    return LinkBudget(snr_scale=dbm_to_mw(config.tx_power_dbm) / dbm_to_mw(noise_power_dbm(config)))


def effective_channel(theta: PhaseVector, chan: ChannelRealization) -> np.ndarray:
    """θ^H H，长度 M 的行向量"""
    return np.conj(theta.theta) @ chan.h_stack


def mrt_beamformer(theta: PhaseVector, chan: ChannelRealization,
                   tx_power_linear: float) -> np.ndarray:
    """
    最大比发射波束 w = √P_T (θ^H H)^H / ‖θ^H H‖

    Args:
        theta: 反射系数向量
        chan: 信道实现
        tx_power_linear: 线性发射功率

    Returns:
        长度 M 的复向量，‖w‖² = P_T

    Raises:
        DegenerateChannelError: θ^H H = 0
    """
    eff = effective_channel(theta, chan)
    norm = np.linalg.norm(eff)
    if norm == 0.0:
        raise DegenerateChannelError("等效信道 θ^H H 为零，MRT 波束无定义")
    return math.sqrt(tx_power_linear) * np.conj(eff) / norm


def instantaneous_snr(theta: PhaseVector, chan: ChannelRealization) -> float:
    """瞬时接收信噪比（未乘 snr_scale）: ‖θ^H H‖² = -θ^H B θ"""
    eff = effective_channel(theta, chan)
    return float(np.real(np.vdot(eff, eff)))


def instantaneous_rate(theta: PhaseVector, chan: ChannelRealization,
                       budget: LinkBudget) -> float:
    """瞬时可达速率 log2(1 + snr_scale ‖θ^H H‖²)，单位 bit/s/Hz"""
    return math.log1p(budget.snr_scale * instantaneous_snr(theta, chan)) / math.log(2.0)


def average_metric(theta: PhaseVector, realizations: Iterable[ChannelRealization],
                   metric: str = 'rate', budget: Optional[LinkBudget] = None) -> float:
    """
    在一组信道实现上对速率或信噪比求算术平均

    Args:
        theta: 反射系数向量
        realizations: 信道实现序列
        metric: 'rate' 或 'snr'
        budget: 链路预算（metric='rate' 时必须提供）

    Returns:
        平均值

    Raises:
        ValueError: 序列为空或 metric 未知
    """
    if metric == 'rate':
        if budget is None:
            raise ValueError("计算平均速率需要提供链路预算")
        values = [instantaneous_rate(theta, chan, budget) for chan in realizations]
    elif metric == 'snr':
        values = [instantaneous_snr(theta, chan) for chan in realizations]
    else:
        raise ValueError(f"未知的指标: {metric}（可选: rate, snr）")

    if not values:
        raise ValueError("信道实现序列为空，无法求平均")
    return math.fsum(values) / len(values)


def normalize_realization(chan: ChannelRealization, budget: LinkBudget) -> ChannelRealization:
    """
    按 √snr_scale 缩放信道，使 ‖θ^H H‖² 直接等于线性接收信噪比

    只缩放 G_k，堆叠恒等式 diag(h_k^H) G_k 仍然成立。
    """
    scale = math.sqrt(budget.snr_scale)
    return ChannelRealization(
        h_stack=chan.h_stack * scale,
        per_ris_g=chan.per_ris_g * scale,
        per_ris_h=chan.per_ris_h,
    )
