"""
实验编排模块
按 快照 x 实现 的协议运行 SSCA、SMM 与随机相位基线，并汇总各扫描点的平均速率
"""
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from channel_model import (
    ChannelRealization, Snapshot, SystemConfig, make_rng, realization_stream,
    sample_realization, sample_snapshot,
)
from config import DESCENT_TOL, UNIT_MODULUS_TOL
from experiment_spec import SWEEP_POWER, SWEEP_RIS_COUNT, ExperimentSpec
from optimizer_trace import OptimizerTrace
from smm_optimizer import run_smm
from ssca_optimizer import random_initial_phi, run_ssca
from system_model import (
    LinkBudget, PhaseVector, average_metric, instantaneous_rate, link_budget,
    normalize_realization,
)

SCHEME_NAMES = {
    'ssca': 'SSCA (平均速率)',
    'smm': 'SMM (平均信噪比)',
    'random': '随机相位',
}


@dataclass
class SchemeRecord:
    """一个 (方案, 扫描点) 的汇总记录"""

    scheme: str
    sweep_value: float
    per_snapshot_rates: List[float] = field(default_factory=list)
    iteration_counts: List[int] = field(default_factory=list)
    stop_reasons: List[str] = field(default_factory=list)
    descent_violations: int = 0
    wall_clock_s: float = 0.0

    @property
    def n_snapshots(self) -> int:
        return len(self.per_snapshot_rates)

    @property
    def mean_rate(self) -> float:
        """快照平均速率 (bit/s/Hz)；fsum 保证与快照顺序无关"""
        if not self.per_snapshot_rates:
            return math.nan
        return math.fsum(self.per_snapshot_rates) / self.n_snapshots

    @property
    def stderr(self) -> float:
        """均值的标准误差，单快照时为 0"""
        n = self.n_snapshots
        if n < 2:
            return 0.0
        mean = self.mean_rate
        var = math.fsum((r - mean) ** 2 for r in self.per_snapshot_rates) / (n - 1)
        return math.sqrt(var / n)


@dataclass
class ExperimentResult:
    """实验结果: 按扫描点、方案顺序排列的记录"""

    spec: ExperimentSpec
    records: List[SchemeRecord] = field(default_factory=list)

    def get(self, scheme: str, sweep_value) -> Optional[SchemeRecord]:
        for record in self.records:
            if record.scheme == scheme and record.sweep_value == sweep_value:
                return record
        return None

    def curve(self, scheme: str) -> List[Tuple[float, float]]:
        """某方案的 (扫描值, 平均速率) 曲线"""
        return [(r.sweep_value, r.mean_rate) for r in self.records if r.scheme == scheme]


def random_phase_baseline(nk: int, rng: np.random.Generator) -> PhaseVector:
    """
    随机相位方案: 每个 φ_n 在 (0, 2π] 上均匀分布

    Args:
        nk: RIS 单元总数
        rng: 随机数生成器

    Returns:
        单位模反射系数向量
    """
    if nk < 1:
        raise ValueError(f"单元总数必须 >= 1，当前: {nk}")
    return PhaseVector.from_phi(2.0 * np.pi * (1.0 - rng.random(nk)))


class ExperimentRunner:
    """实验运行器"""

    def __init__(self, spec: ExperimentSpec, verbose: bool = True):
        """
        初始化运行器

        Args:
            spec: 实验描述
            verbose: 是否打印进度
        """
        self.spec = spec
        self.verbose = verbose

    def _log(self, message: str):
        if self.verbose:
            print(message)

    def _geometry_key(self, sweep_idx: int) -> int:
        # ris_count 模式每个扫描点维度不同，需要重新抽取几何；其余模式整条曲线共用快照
        return sweep_idx if self.spec.sweep.mode == SWEEP_RIS_COUNT else 0

    def _initial_phi(self, config: SystemConfig, geometry_key: int, snap_idx: int) -> np.ndarray:
        if self.spec.ssca_random_init:
            return random_initial_phi(config.nk, make_rng(self.spec.seed, 'init', geometry_key, snap_idx))
        return np.zeros(config.nk)

    def _training_stream(self, snapshot: Snapshot, config: SystemConfig,
                         geometry_key: int, snap_idx: int, count: int):
        # 每个方案各自新建同一种子的训练流，保证 SSCA 与 SMM 看到相同的信道实现
        rng = make_rng(self.spec.seed, 'training', geometry_key, snap_idx)
        return realization_stream(snapshot, config, rng, count)

    def _evaluation_set(self, snapshot: Snapshot, config: SystemConfig,
                        geometry_key: int, snap_idx: int) -> List[ChannelRealization]:
        rng = make_rng(self.spec.seed, 'realization', geometry_key, snap_idx)
        return [sample_realization(snapshot, config, rng)
                for _ in range(self.spec.num_eval_realizations)]

    def _run_scheme(self, scheme: str, snapshot: Snapshot, config: SystemConfig,
                    budget: LinkBudget, eval_set: List[ChannelRealization],
                    geometry_key: int, snap_idx: int) -> Tuple[float, int, str, int]:
        """
        运行单个方案并在评估集上计算平均速率

        Returns:
            (平均速率, 迭代次数, 终止原因, SMM 下降违例次数)
        """
        spec = self.spec
        if scheme == 'random':
            rng = make_rng(spec.seed, 'baseline', geometry_key, snap_idx)
            rates = [instantaneous_rate(random_phase_baseline(config.nk, rng), chan, budget)
                     for chan in eval_set]
            return math.fsum(rates) / len(rates), 0, 'none', 0

        init_phi = self._initial_phi(config, geometry_key, snap_idx)
        if scheme == 'ssca':
            stream = self._training_stream(snapshot, config, geometry_key, snap_idx, spec.ssca.max_iters)
            theta, trace = run_ssca(stream, spec.ssca, budget, init_phi)
            violations = 0
        elif scheme == 'smm':
            stream = self._training_stream(snapshot, config, geometry_key, snap_idx, spec.smm.max_iters)
            normalized = (normalize_realization(chan, budget) for chan in stream)
            theta, trace = run_smm(normalized, spec.smm, PhaseVector.from_phi(init_phi))
            violations = count_descent_violations(trace)
            if np.any(np.abs(np.abs(theta.theta) - 1.0) > UNIT_MODULUS_TOL):
                violations += 1
        else:
            raise ValueError(f"不支持的方案: {scheme}")

        rate = average_metric(theta, eval_set, 'rate', budget)
        return rate, trace.iterations, trace.stop_reason, violations

    def run(self) -> ExperimentResult:
        """
        运行实验

        对每个扫描点、每个快照: 抽取一次长期几何，运行各方案，
        在所有方案共享的独立评估集上计算平均速率，最后跨快照汇总。

        Returns:
            ExperimentResult 对象
        """
        spec = self.spec
        result = ExperimentResult(spec=spec)
        total_points = len(spec.sweep.values)

        self._log(f"🔬 扫描模式: {spec.sweep.mode}，扫描点: {spec.sweep.values}")
        self._log(f"   方案: {', '.join(SCHEME_NAMES[s] for s in spec.schemes)}")
        self._log(f"   快照数: {spec.num_snapshots}，评估实现数: {spec.num_eval_realizations}，种子: {spec.seed}")
        self._log("=" * 60)

        for sweep_idx, value in enumerate(spec.sweep.values):
            config = spec.config_for(value)
            budget = link_budget(config)
            geometry_key = self._geometry_key(sweep_idx)
            records = {s: SchemeRecord(scheme=s, sweep_value=value) for s in spec.schemes}

            self._log(f"\n[{sweep_idx + 1}/{total_points}] 扫描值 {value} "
                      f"(M={config.M}, K={config.K}, N={config.N}, ρ={config.rician_factor}, "
                      f"P_T={config.tx_power_dbm} dBm)")

            for snap_idx in range(spec.num_snapshots):
                snapshot = sample_snapshot(config, make_rng(spec.seed, 'snapshot', geometry_key, snap_idx))
                eval_set = self._evaluation_set(snapshot, config, geometry_key, snap_idx)

                for scheme in spec.schemes:
                    start = time.perf_counter()
                    rate, iters, reason, violations = self._run_scheme(
                        scheme, snapshot, config, budget, eval_set, geometry_key, snap_idx)
                    record = records[scheme]
                    record.wall_clock_s += time.perf_counter() - start
                    record.per_snapshot_rates.append(rate)
                    record.iteration_counts.append(iters)
                    record.stop_reasons.append(reason)
                    record.descent_violations += violations

                if (snap_idx + 1) % 10 == 0 or snap_idx + 1 == spec.num_snapshots:
                    self._log(f"   快照 {snap_idx + 1}/{spec.num_snapshots} 完成")

            for scheme in spec.schemes:
                record = records[scheme]
                result.records.append(record)
                self._log(f"   - {SCHEME_NAMES[scheme]}: {record.mean_rate:.4f} ± {record.stderr:.4f} bit/s/Hz "
                          f"({record.wall_clock_s:.1f} 秒)")

        self._log("\n" + "=" * 60)
        self._log("✅ 实验完成！")
        return result

    def trace_single_snapshot(self, sweep_idx: int = 0, snap_idx: int = 0) -> Dict[str, OptimizerTrace]:
        """
        在一个快照上运行两个优化器并返回迭代轨迹

        Args:
            sweep_idx: 扫描点序号
            snap_idx: 快照序号

        Returns:
            {'ssca': 轨迹, 'smm': 轨迹}
        """
        spec = self.spec
        if not 0 <= sweep_idx < len(spec.sweep.values):
            raise ValueError(f"扫描点序号越界: {sweep_idx}")
        config = spec.config_for(spec.sweep.values[sweep_idx])
        budget = link_budget(config)
        geometry_key = self._geometry_key(sweep_idx)
        snapshot = sample_snapshot(config, make_rng(spec.seed, 'snapshot', geometry_key, snap_idx))
        init_phi = self._initial_phi(config, geometry_key, snap_idx)

        stream = self._training_stream(snapshot, config, geometry_key, snap_idx, spec.ssca.max_iters)
        _, ssca_trace = run_ssca(stream, spec.ssca, budget, init_phi)
        stream = self._training_stream(snapshot, config, geometry_key, snap_idx, spec.smm.max_iters)
        normalized = (normalize_realization(chan, budget) for chan in stream)
        _, smm_trace = run_smm(normalized, spec.smm, PhaseVector.from_phi(init_phi))

        self._log(f"📈 SSCA: {ssca_trace.iterations} 次迭代 ({ssca_trace.stop_reason})")
        self._log(f"📈 SMM: {smm_trace.iterations} 次迭代 ({smm_trace.stop_reason})")
        return {'ssca': ssca_trace, 'smm': smm_trace}


def run_experiment(spec: ExperimentSpec, verbose: bool = False) -> ExperimentResult:
    """运行实验的便捷入口"""
    return ExperimentRunner(spec, verbose=verbose).run()


def count_descent_violations(trace: OptimizerTrace, tol: float = DESCENT_TOL) -> int:
    """统计 SMM 轨迹中代理函数未下降（超过容差）的步数"""
    return sum(1 for margin in trace.column('descent_margin') if margin > tol)


def power_gain_db(result: ExperimentResult, scheme: str, reference: str = 'random',
                  reference_power_dbm: float = 10.0) -> Optional[float]:
    """
    达到参考方案在 reference_power_dbm 下的速率，scheme 可节省的发射功率 (dB)

    两条曲线均按发射功率线性插值。

    Returns:
        节省的功率 (dB)；目标速率不在 scheme 曲线范围内时返回 None
    """
    if result.spec.sweep.mode != SWEEP_POWER:
        raise ValueError("功率增益只适用于发射功率扫描")

    ref_curve = sorted(result.curve(reference))
    curve = sorted(result.curve(scheme))
    if not ref_curve or not curve:
        return None

    ref_powers, ref_rates = zip(*ref_curve)
    if not ref_powers[0] <= reference_power_dbm <= ref_powers[-1]:
        return None
    target = float(np.interp(reference_power_dbm, ref_powers, ref_rates))

    # 沿功率递增方向寻找第一次达到目标速率的位置
    for power, rate in curve:
        if rate == target:
            return reference_power_dbm - power
    for (p0, r0), (p1, r1) in zip(curve, curve[1:]):
        if min(r0, r1) < target < max(r0, r1):
            power = p0 + (target - r0) * (p1 - p0) / (r1 - r0)
            return reference_power_dbm - power
    return None


def scheme_parity(result: ExperimentResult, scheme_a: str = 'ssca', scheme_b: str = 'smm',
                  tolerance: float = 0.05) -> Optional[float]:
    """
    两个方案逐快照速率相对差（相对 scheme_a）不超过 tolerance 的比例

    Returns:
        比例 (0~1)；缺少任一方案时返回 None
    """
    total = 0
    agree = 0
    for record_a in (r for r in result.records if r.scheme == scheme_a):
        record_b = result.get(scheme_b, record_a.sweep_value)
        if record_b is None:
            continue
        for ra, rb in zip(record_a.per_snapshot_rates, record_b.per_snapshot_rates):
            total += 1
            if abs(ra - rb) <= tolerance * abs(ra):
                agree += 1
    if total == 0:
        return None
    return agree / total


def print_summary(result: ExperimentResult):
    """打印结果摘要"""
    spec = result.spec
    print("\n" + "=" * 60)
    print("📊 仿真摘要")
    print("=" * 60)
    print(f"扫描模式: {spec.sweep.mode}")
    print(f"快照数: {spec.num_snapshots}，评估实现数: {spec.num_eval_realizations}")

    header = f"{'扫描值':>10} | " + " | ".join(f"{s:>18}" for s in spec.schemes)
    print(header)
    print("-" * len(header))
    for value in spec.sweep.values:
        cells = []
        for scheme in spec.schemes:
            record = result.get(scheme, value)
            cells.append(f"{record.mean_rate:>9.4f} ± {record.stderr:<6.4f}" if record else f"{'-':>18}")
        print(f"{value:>10} | " + " | ".join(cells))

    if 'ssca' in spec.schemes and 'smm' in spec.schemes:
        parity = scheme_parity(result)
        if parity is not None:
            print(f"\nSSCA/SMM 逐快照速率相差 5% 以内的比例: {parity * 100:.1f}%")

    if 'smm' in spec.schemes:
        violations = sum(r.descent_violations for r in result.records if r.scheme == 'smm')
        if violations:
            print(f"⚠️  SMM 代理函数下降检查: {violations} 次违例")
        else:
            print("✅ SMM 代理函数每步下降")

    if spec.sweep.mode == SWEEP_POWER and 'random' in spec.schemes:
        for scheme in ('ssca', 'smm'):
            if scheme not in spec.schemes:
                continue
            gain = power_gain_db(result, scheme)
            if gain is None:
                print(f"{SCHEME_NAMES[scheme]}: 扫描范围内无法计算功率增益")
            else:
                print(f"{SCHEME_NAMES[scheme]}: 达到随机相位 10 dBm 速率所需功率节省 {gain:.2f} dB")

    print("=" * 60)
