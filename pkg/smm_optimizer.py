"""
SMM 平均信噪比最大化
目标 min E[θ^H B_i θ]，B_i = -H_i H_i^H；单位模约束松弛为 |θ_n|² <= 1（最优解必在边界），
样本平均 (SAA) 递推 + MM 代理函数 + 逐元素 KKT 闭式解
"""
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from channel_model import ChannelRealization, numeric_field_errors
from config import DEFAULT_EPSILON, DEFAULT_MAX_ITERS, DEFAULT_TAU_SMM
from optimizer_trace import STOP_CONVERGED, STOP_MAX_ITERS, STOP_TRUNCATED, OptimizerTrace
from system_model import PhaseVector

SMM_TRACE_COLUMNS = ('t', 'g_tilde', 'snr_estimate', 'descent_margin')

_sign_note_shown = False


@dataclass
class SmmParams:
    """SMM 参数，tau 取任意小正数"""

    tau: float = DEFAULT_TAU_SMM
    epsilon: float = DEFAULT_EPSILON
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        errors = numeric_field_errors(self, ('tau', 'epsilon', 'max_iters'))
        if errors:
            raise ValueError("SMM 参数无效: " + "; ".join(errors))

        if not self.tau > 0:
            errors.append(f"tau 必须 > 0，当前: {self.tau}")
        if not self.epsilon > 0:
            errors.append(f"epsilon 必须 > 0，当前: {self.epsilon}")
        if not float(self.max_iters).is_integer() or self.max_iters < 0:
            errors.append(f"max_iters 必须为非负整数，当前: {self.max_iters}")
        if errors:
            raise ValueError("SMM 参数无效: " + "; ".join(errors))

    def to_dict(self) -> dict:
        return {'tau': self.tau, 'epsilon': self.epsilon, 'max_iters': self.max_iters}


@dataclass
class SmmState:
    """
    SMM 迭代状态

    Attributes:
        theta: 当前反射系数 θ^(t)
        b_tilde: B_i 的样本平均 B̃_t (NK x NK)
        d: B_i θ^(i-1) 的样本平均 d_t
        theta_ddot: 历史迭代点 θ^(i-1) 的样本平均 θ̈^(t)
        t: 已处理的时隙数
        last_objective: g̃(θ^(t)) = θ^H B̃_t θ
        objective_change: |g̃(θ^(t)) - g̃(θ^(t-1))|，两者都用 B̃_t 计算
        descent_margin: ḡ_t(θ^(t)) - ḡ_t(θ^(t-1))，应 <= 0
    """

    theta: PhaseVector
    b_tilde: np.ndarray
    d: np.ndarray
    theta_ddot: np.ndarray
    t: int = 0
    last_objective: float = math.nan
    objective_change: float = math.inf
    descent_margin: float = 0.0

    @classmethod
    def initial(cls, init_theta: PhaseVector) -> 'SmmState':
        nk = len(init_theta)
        return cls(
            theta=init_theta,
            b_tilde=np.zeros((nk, nk), dtype=complex),
            d=np.zeros(nk, dtype=complex),
            theta_ddot=np.zeros(nk, dtype=complex),
        )


def build_B(chan: ChannelRealization) -> np.ndarray:
    """B_i = -H_i H_i^H（厄米、半负定）"""
    h = chan.h_stack
    b = -(h @ np.conj(h.T))
    return 0.5 * (b + np.conj(b.T))


def quadratic_form(theta: np.ndarray, matrix: np.ndarray) -> float:
    """θ^H A θ 的实部"""
    return float(np.real(np.vdot(theta, matrix @ theta)))


def mm_surrogate(theta: np.ndarray, theta_prev: np.ndarray, B: np.ndarray, tau: float) -> float:
    """
    MM 代理函数 ĝ(θ, θ') = 2Re{θ'^H B θ} - θ'^H B θ' + τ‖θ - θ'‖²

    由 (θ - θ')^H B (θ - θ') <= 0 可知 ĝ(θ, θ') >= θ^H B θ，且 θ = θ' 时取等。
    """
    delta = theta - theta_prev
    return float(
        2.0 * np.real(np.vdot(theta_prev, B @ theta))
        - quadratic_form(theta_prev, B)
        + tau * np.real(np.vdot(delta, delta))
    )


def update_saa(state: SmmState, B_t: np.ndarray) -> SmmState:
    """
    样本平均递推（1/t 权重），θ̈ 用上一迭代点 θ^(t-1) 更新

    Returns:
        t 加一后的新状态，θ 保持不变
    """
    t = state.t + 1
    w = 1.0 / t
    theta_prev = state.theta.theta
    return SmmState(
        theta=state.theta,
        b_tilde=w * B_t + (1.0 - w) * state.b_tilde,
        d=w * (B_t @ theta_prev) + (1.0 - w) * state.d,
        theta_ddot=w * theta_prev + (1.0 - w) * state.theta_ddot,
        t=t,
        last_objective=state.last_objective,
        objective_change=state.objective_change,
        descent_margin=state.descent_margin,
    )


def smm_phase_update(d: np.ndarray, theta_ddot: np.ndarray, tau: float,
                     previous: Optional[np.ndarray] = None) -> PhaseVector:
    """
    逐元素求解 min_{|θ_n|=1} -2Re{d_n^* θ_n} + τ|θ_n - θ̈_n|²

    解为 θ_n = (d_n + τθ̈_n) / |d_n + τθ̈_n|，即与 d_n + τθ̈_n 同相。

    Args:
        d: 线性项向量
        theta_ddot: 历史迭代点的样本平均
        tau: 正则系数 τ
        previous: 平局（d_n + τθ̈_n = 0）时保留的上一迭代值

    Returns:
        单位模反射系数向量
    """
    if not tau > 0:
        raise ValueError(f"tau 必须 > 0，当前: {tau}")
    target = np.asarray(d, dtype=complex) + tau * np.asarray(theta_ddot, dtype=complex)
    magnitude = np.abs(target)
    tie = magnitude == 0.0

    theta = np.empty_like(target)
    theta[~tie] = target[~tie] / magnitude[~tie]
    if np.any(tie):
        fallback = np.ones_like(target) if previous is None else np.asarray(previous, dtype=complex)
        theta[tie] = fallback[tie]
        print(f"⚠️  SMM 相位更新: {int(tie.sum())} 个元素出现驻点平局，保留上一迭代值")
    return PhaseVector(theta)


def _show_sign_note():
    global _sign_note_shown
    if not _sign_note_shown:
        _sign_note_shown = True
        print("ℹ️  SMM: 代理函数取 2Re{θ'^H B θ} - θ'^H B θ'（满足 MM 条件的符号），"
              "相位与 τθ̈ - d 对齐，而非 e^{-j∠(d+τθ̈)}")


def surrogate_gap(theta_new: np.ndarray, theta_old: np.ndarray, d: np.ndarray,
                  theta_ddot: np.ndarray, tau: float) -> float:
    """
    ḡ_t(θ_new) - ḡ_t(θ_old)

    ḡ_t(θ) = 常数 + 2Re{d_t^H θ} + τ‖θ‖² - 2τRe{θ̈^H θ}，常数部分在差值中抵消。
    """
    delta = theta_new - theta_old
    return float(
        2.0 * np.real(np.vdot(d, delta))
        + tau * (np.real(np.vdot(theta_new, theta_new)) - np.real(np.vdot(theta_old, theta_old)))
        - 2.0 * tau * np.real(np.vdot(theta_ddot, delta))
    )


def smm_step(state: SmmState, chan: ChannelRealization, params: SmmParams) -> SmmState:
    """
    执行一次 SMM 迭代: 构造 B_t -> 更新样本平均 -> 逐元素相位更新 -> 记录 g̃(θ^(t))

    代理函数 ĝ_i(θ, θ') = 2Re{θ'^H B_i θ} - θ'^H B_i θ' + τ‖θ - θ'‖² 的线性项为 +2Re{d_t^H θ}，
    因此相位更新的线性项取 -d_t。
    """
    B_t = build_B(chan)
    saa = update_saa(state, B_t)
    theta_old = state.theta.theta

    theta_new = smm_phase_update(-saa.d, saa.theta_ddot, params.tau, previous=theta_old)

    objective_old = quadratic_form(theta_old, saa.b_tilde)
    objective_new = quadratic_form(theta_new.theta, saa.b_tilde)
    saa.theta = theta_new
    saa.last_objective = objective_new
    saa.objective_change = abs(objective_new - objective_old)
    saa.descent_margin = surrogate_gap(theta_new.theta, theta_old, saa.d, saa.theta_ddot, params.tau)
    return saa


def run_smm(realization_stream: Iterable[ChannelRealization], params: SmmParams,
            init_theta: PhaseVector) -> Tuple[PhaseVector, OptimizerTrace]:
    """
    SMM 主循环，每个时隙消耗一个信道实现

    终止条件: |g̃(θ^(t)) - g̃(θ^(t-1))| < epsilon，或达到 max_iters，或信道序列耗尽（截断）。

    Args:
        realization_stream: 信道实现序列（实验中为按 √snr_scale 归一化后的信道）
        params: SMM 参数
        init_theta: 初始反射系数 θ^(0)

    Returns:
        (最终反射系数, 迭代轨迹)
    """
    _show_sign_note()
    state = SmmState.initial(init_theta)
    trace = OptimizerTrace(columns=SMM_TRACE_COLUMNS)
    stream = iter(realization_stream)

    trace.stop_reason = STOP_MAX_ITERS
    while state.t < params.max_iters:
        try:
            chan = next(stream)
        except StopIteration:
            trace.stop_reason = STOP_TRUNCATED
            break

        state = smm_step(state, chan, params)
        trace.append(state.t, state.last_objective, -state.last_objective, state.descent_margin)

        if state.objective_change < params.epsilon:
            trace.stop_reason = STOP_CONVERGED
            break

    return state.theta, trace
