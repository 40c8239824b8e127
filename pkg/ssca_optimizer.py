"""
SSCA 平均速率最大化
在无约束相位 φ 上最小化 f(φ) = -E[R̄_i(φ)]，梯度用递推样本估计，代理函数为二次型
"""
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from channel_model import ChannelRealization, numeric_field_errors
from config import (
    DEFAULT_MAX_ITERS, DEFAULT_SSCA_ALPHA, DEFAULT_SSCA_BETA, DEFAULT_SSCA_EPSILON,
    DEFAULT_TAU_SSCA,
)
from optimizer_trace import STOP_CONVERGED, STOP_MAX_ITERS, STOP_TRUNCATED, OptimizerTrace
from system_model import LinkBudget, PhaseVector, instantaneous_rate

SSCA_TRACE_COLUMNS = ('iteration', 'surrogate_gap', 'rate_estimate')


@dataclass
class SscaParams:
    """
    SSCA 超参数

    ρ^(i) = i^-beta 用于梯度平均，γ^(i) = i^-alpha 用于平滑，
    收敛要求 0.5 <= beta <= 1 且 beta < alpha <= 1。
    """

    tau: float = DEFAULT_TAU_SSCA
    alpha: float = DEFAULT_SSCA_ALPHA
    beta: float = DEFAULT_SSCA_BETA
    epsilon: float = DEFAULT_SSCA_EPSILON
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        errors = numeric_field_errors(self, ('tau', 'alpha', 'beta', 'epsilon', 'max_iters'))
        if errors:
            raise ValueError("SSCA 参数无效: " + "; ".join(errors))

        if not self.tau > 0:
            errors.append(f"tau 必须 > 0，当前: {self.tau}")
        if not 0.5 <= self.beta <= 1.0:
            errors.append(f"beta 必须位于 [0.5, 1]，当前: {self.beta}")
        if not self.beta < self.alpha <= 1.0:
            errors.append(f"alpha 必须满足 beta < alpha <= 1，当前: {self.alpha}")
        if not self.epsilon > 0:
            errors.append(f"epsilon 必须 > 0，当前: {self.epsilon}")
        if not float(self.max_iters).is_integer() or self.max_iters < 0:
            errors.append(f"max_iters 必须为非负整数，当前: {self.max_iters}")
        if errors:
            raise ValueError("SSCA 参数无效: " + "; ".join(errors))

    def to_dict(self) -> dict:
        return {
            'tau': self.tau,
            'alpha': self.alpha,
            'beta': self.beta,
            'epsilon': self.epsilon,
            'max_iters': self.max_iters,
        }


@dataclass
class SscaState:
    """SSCA 迭代状态: φ^(i)、梯度估计 f^(i)、迭代序号 i 与最近一次代理函数差值"""

    phi: np.ndarray
    grad_est: np.ndarray
    iter: int = 0
    last_surrogate_gap: float = math.inf

    @classmethod
    def initial(cls, init_phi: np.ndarray) -> 'SscaState':
        phi = np.asarray(init_phi, dtype=float).copy()
        return cls(phi=phi, grad_est=np.zeros_like(phi))


def grad_rate_theta(theta: PhaseVector, chan: ChannelRealization,
                    budget: LinkBudget) -> np.ndarray:
    """
    瞬时速率（自然对数）对 θ 的梯度 2A θ / (1 + θ^H A θ)，A = snr_scale H H^H

    Args:
        theta: 反射系数向量
        chan: 信道实现
        budget: 链路预算

    Returns:
        长度 NK 的复向量（实部/虚部分别对应对 Re θ、Im θ 的偏导）
    """
    h = chan.h_stack
    hh_theta = np.conj(h.T) @ theta.theta          # H^H θ
    a_theta = budget.snr_scale * (h @ hh_theta)    # A θ
    quad = budget.snr_scale * float(np.real(np.vdot(hh_theta, hh_theta)))
    return 2.0 * a_theta / (1.0 + quad)


def grad_rate_phi(phi: np.ndarray, chan: ChannelRealization,
                  budget: LinkBudget) -> np.ndarray:
    """链式法则: ∇R̄(φ) = Re{-j θ* ∘ ∇R(θ)}，θ = e^{jφ}"""
    theta = PhaseVector.from_phi(phi)
    grad_theta = grad_rate_theta(theta, chan, budget)
    return np.real(-1j * np.conj(theta.theta) * grad_theta)


def update_gradient_estimate(state: SscaState, sample_grad: np.ndarray,
                             params: SscaParams, iteration: Optional[int] = None) -> np.ndarray:
    """
    梯度估计递推 f^(i) = (1 - ρ^(i)) f^(i-1) - ρ^(i) ∇R_i(φ^(i-1))

    Args:
        state: 当前状态，grad_est 为 f^(i-1)
        sample_grad: 本时隙样本梯度 ∇R_i(φ^(i-1))
        params: SSCA 参数
        iteration: 迭代序号 i，缺省取 state.iter

    Returns:
        f^(i)
    """
    i = state.iter if iteration is None else iteration
    if i < 1:
        raise ValueError(f"迭代序号必须 >= 1，当前: {i}")
    rho = i ** (-params.beta)
    return (1.0 - rho) * state.grad_est - rho * np.asarray(sample_grad, dtype=float)


def surrogate_value(phi: np.ndarray, phi_prev: np.ndarray, grad_est: np.ndarray,
                    tau: float) -> float:
    """代理函数 <φ - φ_prev, f> + (τ/2)‖φ - φ_prev‖²"""
    delta = phi - phi_prev
    return float(delta @ grad_est + 0.5 * tau * (delta @ delta))


def surrogate_minimizer(phi_prev: np.ndarray, grad_est: np.ndarray, tau: float) -> np.ndarray:
    """二次代理函数的闭式极小点 φ̂ = φ_prev - f / τ"""
    if not tau > 0:
        raise ValueError(f"tau 必须 > 0，当前: {tau}")
    return phi_prev - grad_est / tau


def ssca_step(state: SscaState, chan: ChannelRealization, params: SscaParams,
              budget: LinkBudget) -> SscaState:
    """
    执行一次 SSCA 迭代：更新梯度估计 -> 求代理极小点 -> 平滑更新 φ

    Returns:
        新状态，last_surrogate_gap 为 |f̂_i(φ^(i), φ^(i-1)) - f̂_i(φ^(i-1), φ^(i-1))|
    """
    i = state.iter + 1
    sample_grad = grad_rate_phi(state.phi, chan, budget)
    grad_est = update_gradient_estimate(state, sample_grad, params, iteration=i)
    phi_hat = surrogate_minimizer(state.phi, grad_est, params.tau)

    gamma = i ** (-params.alpha)
    phi_new = (1.0 - gamma) * state.phi + gamma * phi_hat
    # f̂_i(φ^(i-1), φ^(i-1)) = 0
    gap = abs(surrogate_value(phi_new, state.phi, grad_est, params.tau))
    return SscaState(phi=phi_new, grad_est=grad_est, iter=i, last_surrogate_gap=gap)


def random_initial_phi(nk: int, rng: np.random.Generator) -> np.ndarray:
    """均匀随机初始相位，取值 (0, 2π]"""
    return 2.0 * np.pi * (1.0 - rng.random(nk))


def run_ssca(realization_stream: Iterable[ChannelRealization], params: SscaParams,
             budget: LinkBudget, init_phi: np.ndarray) -> Tuple[PhaseVector, OptimizerTrace]:
    """
    SSCA 主循环，每个时隙消耗一个信道实现

    终止条件: 代理函数差值 < epsilon，或达到 max_iters，或信道序列耗尽（截断）。

    Args:
        realization_stream: 信道实现序列
        params: SSCA 参数
        budget: 链路预算
        init_phi: 初始相位 φ^(0)

    Returns:
        (最终反射系数, 迭代轨迹)
    """
    state = SscaState.initial(init_phi)
    trace = OptimizerTrace(columns=SSCA_TRACE_COLUMNS)
    stream = iter(realization_stream)
    rate_sum = 0.0

    trace.stop_reason = STOP_MAX_ITERS
    while state.iter < params.max_iters:
        try:
            chan = next(stream)
        except StopIteration:
            trace.stop_reason = STOP_TRUNCATED
            break

        # 运行平均速率：在更新前的 φ^(i-1) 上评估新样本
        rate_sum += instantaneous_rate(PhaseVector.from_phi(state.phi), chan, budget)
        state = ssca_step(state, chan, params, budget)
        trace.append(state.iter, state.last_surrogate_gap, rate_sum / state.iter)

        if state.last_surrogate_gap < params.epsilon:
            trace.stop_reason = STOP_CONVERGED
            break

    return PhaseVector.from_phi(state.phi), trace
