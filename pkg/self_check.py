"""
自检模块
快速验证梯度、MM 代理函数、穷举网格最优以及信道模型的各项不变量
"""
import itertools
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from channel_model import (
    ChannelRealization, SystemConfig, make_rng, sample_realization, sample_snapshot, stack_effective_channel,
)
from config import DEFAULT_SEED, DESCENT_TOL
from experiment_runner import count_descent_violations
from smm_optimizer import SmmParams, build_B, mm_surrogate, quadratic_form, run_smm
from ssca_optimizer import SscaParams, grad_rate_phi, run_ssca
from system_model import (
    LinkBudget, PhaseVector, instantaneous_snr, link_budget, normalize_realization,
)

FD_STEP = 1e-6
FD_REL_TOL = 1e-5
ORACLE_GRID_POINTS = 64
ORACLE_REL_TOL = 0.01


@dataclass
class CheckResult:
    """单项检查结果"""

    name: str
    passed: bool
    detail: str


def random_channel(rng: np.random.Generator, nk: int, m: int) -> ChannelRealization:
    """复高斯随机信道，NK x M"""
    h = (rng.standard_normal((nk, m)) + 1j * rng.standard_normal((nk, m))) / math.sqrt(2.0)
    # 单 RIS 视角: G = H，h = 全 1，堆叠恒等式成立
    return ChannelRealization(h_stack=h, per_ris_g=h[None, :, :], per_ris_h=np.ones((1, nk), dtype=complex))


def rate_nats_phi(phi: np.ndarray, chan, budget: LinkBudget) -> float:
    """以相位为自变量的瞬时速率（自然对数）"""
    return math.log1p(budget.snr_scale * instantaneous_snr(PhaseVector.from_phi(phi), chan))


def finite_difference_grad(phi: np.ndarray, chan, budget: LinkBudget, step: float = FD_STEP) -> np.ndarray:
    """速率对相位的中心差分梯度"""
    grad = np.zeros_like(phi)
    for n in range(phi.size):
        e = np.zeros_like(phi)
        e[n] = step
        grad[n] = (rate_nats_phi(phi + e, chan, budget) - rate_nats_phi(phi - e, chan, budget)) / (2 * step)
    return grad


def check_gradient(rng: np.random.Generator, instances: int = 100) -> CheckResult:
    """链式法则梯度与中心差分比较（NK <= 8, M <= 4）"""
    worst = 0.0
    for _ in range(instances):
        nk = int(rng.integers(1, 9))
        m = int(rng.integers(1, 5))
        chan = random_channel(rng, nk, m)
        budget = LinkBudget(snr_scale=float(rng.uniform(0.1, 10.0)))
        phi = rng.uniform(0.0, 2.0 * np.pi, nk)
        analytic = grad_rate_phi(phi, chan, budget)
        numeric = finite_difference_grad(phi, chan, budget)
        err = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1e-3)
        worst = max(worst, err)
    return CheckResult('梯度有限差分', worst < FD_REL_TOL, f"最大相对误差 {worst:.2e}（{instances} 个实例）")


def check_mm_surrogate(rng: np.random.Generator, triples: int = 1000, tau: float = 1e-6) -> CheckResult:
    """MM 条件: ĝ(θ, θ) = g(θ) 且 ĝ(θ, θ') >= g(θ)"""
    worst_touch = 0.0
    worst_bound = 0.0
    for _ in range(triples):
        nk = int(rng.integers(1, 9))
        m = int(rng.integers(1, 5))
        B = build_B(random_channel(rng, nk, m))
        theta = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, nk))
        theta_prev = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, nk))
        g = quadratic_form(theta, B)
        worst_touch = max(worst_touch, abs(mm_surrogate(theta, theta, B, tau) - g))
        worst_bound = min(worst_bound, mm_surrogate(theta, theta_prev, B, tau) - g)
    passed = worst_touch <= DESCENT_TOL and worst_bound >= -DESCENT_TOL
    return CheckResult('MM 代理条件', passed,
                       f"|ĝ(θ,θ)-g(θ)| <= {worst_touch:.1e}，min ĝ(θ,θ')-g(θ) = {worst_bound:.1e}")


def grid_max_snr(chan, points: int = ORACLE_GRID_POINTS) -> float:
    """对每个单元在 points 个相位上穷举，返回最大 ‖θ^H H‖²"""
    nk = chan.nk
    grid = np.exp(1j * 2.0 * np.pi * np.arange(points) / points)
    best = 0.0
    # 逐个固定第一个单元的相位分块计算，控制内存
    for first in grid:
        rest = np.array(list(itertools.product(grid, repeat=nk - 1))) if nk > 1 else np.ones((1, 0))
        thetas = np.hstack([np.full((rest.shape[0], 1), first), rest])
        eff = np.conj(thetas) @ chan.h_stack
        best = max(best, float(np.max(np.sum(np.abs(eff) ** 2, axis=1))))
    return best


def check_oracle(rng: np.random.Generator) -> CheckResult:
    """K=1, N=3, M=2 的单一确定信道上，两种优化器达到穷举网格最优的 99%"""
    config = SystemConfig(M=2, K=1, N=3, rician_factor=100.0)
    snapshot = sample_snapshot(config, rng)
    chan = sample_realization(snapshot, config, rng, apply_path_loss=False)
    budget = LinkBudget(snr_scale=1.0)
    best = grid_max_snr(chan)

    ssca_params = SscaParams(tau=1.0, epsilon=1e-12, max_iters=3000)
    theta_ssca, _ = run_ssca(itertools.repeat(chan, ssca_params.max_iters), ssca_params, budget,
                             np.zeros(config.nk))
    smm_params = SmmParams(tau=1e-6, epsilon=1e-12, max_iters=500)
    theta_smm, _ = run_smm(itertools.repeat(chan, smm_params.max_iters), smm_params,
                           PhaseVector(np.ones(config.nk, dtype=complex)))

    snr_ssca = instantaneous_snr(theta_ssca, chan)
    snr_smm = instantaneous_snr(theta_smm, chan)
    passed = snr_ssca >= (1 - ORACLE_REL_TOL) * best and snr_smm >= (1 - ORACLE_REL_TOL) * best
    return CheckResult('穷举网格最优', passed,
                       f"网格最优 {best:.4f}，SSCA {snr_ssca:.4f}，SMM {snr_smm:.4f}")


def check_channel_invariants(rng: np.random.Generator) -> CheckResult:
    """快照归一化、导向矢量单位模与堆叠恒等式"""
    config = SystemConfig(M=4, K=2, N=20, rician_factor=10.0)
    problems = []
    for _ in range(20):
        snapshot = sample_snapshot(config, rng)
        if np.max(np.abs(snapshot.path_gain_vars.sum(axis=1) - 1.0)) > 1e-12:
            problems.append('路径功率未归一化')
        if np.max(np.abs(np.abs(snapshot.los_components) - 1.0)) > 1e-12:
            problems.append('LoS 分量不是单位模')
        chan = sample_realization(snapshot, config, rng)
        rebuilt = stack_effective_channel(chan.per_ris_g, chan.per_ris_h)
        scale = np.max(np.abs(chan.h_stack))
        if np.max(np.abs(rebuilt - chan.h_stack)) > 1e-12 * scale:
            problems.append('堆叠恒等式不成立')
    return CheckResult('信道模型不变量', not problems, '; '.join(sorted(set(problems))) or '全部满足')


def check_smm_descent(rng: np.random.Generator, steps: int = 200) -> CheckResult:
    """仿真信道上 SMM 每步代理函数下降且输出单位模"""
    config = SystemConfig(M=2, K=2, N=4, rician_factor=10.0, tx_power_dbm=10.0)
    budget = link_budget(config)
    snapshot = sample_snapshot(config, rng)
    stream = (normalize_realization(sample_realization(snapshot, config, rng), budget) for _ in range(steps))
    params = SmmParams(epsilon=1e-300, max_iters=steps)
    theta, trace = run_smm(stream, params, PhaseVector(np.ones(config.nk, dtype=complex)))
    violations = count_descent_violations(trace)
    modulus_err = float(np.max(np.abs(np.abs(theta.theta) - 1.0)))
    passed = violations == 0 and modulus_err <= 1e-12
    return CheckResult('SMM 逐步下降', passed, f"违例 {violations} / {trace.iterations} 步，模误差 {modulus_err:.1e}")


def run_self_checks(seed: int = DEFAULT_SEED, verbose: bool = True) -> List[CheckResult]:
    """
    运行全部自检

    Args:
        seed: 主种子
        verbose: 是否逐项打印

    Returns:
        CheckResult 列表
    """
    checks = [check_gradient, check_mm_surrogate, check_oracle, check_channel_invariants, check_smm_descent]
    results = []
    for idx, check in enumerate(checks):
        result = check(make_rng(seed, 'selftest', idx))
        results.append(result)
        if verbose:
            status = '✅' if result.passed else '❌'
            print(f"{status} {result.name}: {result.detail}")
    return results
