#!/usr/bin/env python3
"""
RIS 相位优化仿真器
在统计信道状态信息下比较 SSCA（平均速率）、SMM（平均信噪比）与随机相位方案
"""
import argparse
import os
import sys
from typing import Dict, List, Optional

from config import OUTPUT_DIR, VERSION
from experiment_runner import ExperimentRunner, print_summary
from experiment_spec import (
    SWEEP_POWER, SWEEP_RICIAN, SWEEP_RIS_COUNT, ConfigError, ExperimentSpec,
    load_experiment_spec, merge_dicts,
)
from html_report_generator import HTMLReportGenerator
from optimizer_trace import write_trace_csv
from result_writer import emit_results
from self_check import run_self_checks

SUBCOMMAND_MODES = {
    'fig2': SWEEP_POWER,
    'fig3': SWEEP_RIS_COUNT,
    'rician': SWEEP_RICIAN,
    'converge': SWEEP_POWER,
}

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def print_banner():
    """打印程序横幅"""
    banner = f"""
╔═══════════════════════════════════════════════════════════╗
║                                                           ║
║        RIS-Sim - 多 RIS 相位优化仿真器                    ║
║        Statistical-CSI Phase Shift Optimizer              ║
║                                                           ║
║        Version: {VERSION:<42}║
║                                                           ║
╚═══════════════════════════════════════════════════════════╝
"""
    print(banner)


def build_parser() -> argparse.ArgumentParser:
    """创建命令行参数解析器"""
    parser = argparse.ArgumentParser(
        description='多 RIS 单用户 MISO 下行链路的统计信道相位优化仿真',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  # 发射功率扫描（默认 100 快照 x 100 实现）
  python simulate_ris.py fig2

  # 快速试跑: 缩小快照与评估规模
  python simulate_ris.py fig2 --snapshots 5 --eval-realizations 20 --max-iters 500

  # 固定 NK=64，扫描 RIS 数量
  python simulate_ris.py fig3 --out ./results_fig3

  # 莱斯因子扫描
  python simulate_ris.py rician --schemes ssca random

  # SSCA 的 τ 扫描（每个取值写到 out/tau_<v>/）
  python simulate_ris.py fig2 --tau-ssca 0.002 0.005 0.02

  # 输出单个快照上的优化器收敛轨迹
  python simulate_ris.py converge --out ./traces

  # 运行自检
  python simulate_ris.py selftest

注意：
  - 相同种子与配置重复运行，CSV/JSON 输出逐字节一致
  - 参数优先级: 命令行 > --config 文件 > .env > 内置默认值
        """
    )
    subparsers = parser.add_subparsers(dest='command', metavar='{fig2,fig3,rician,converge,selftest}')
    subparsers.required = True

    help_texts = {
        'fig2': '发射功率扫描',
        'fig3': '固定总单元数，扫描 RIS 数量',
        'rician': '莱斯因子扫描',
        'converge': '输出单个快照上 SSCA/SMM 的迭代轨迹',
    }
    for name, help_text in help_texts.items():
        sub = subparsers.add_parser(name, help=help_text)
        _add_common_arguments(sub)
        if name == 'converge':
            sub.add_argument('--point', type=int, default=0, help='扫描点序号 (默认: 0)')
            sub.add_argument('--snapshot', type=int, default=0, help='快照序号 (默认: 0)')

    selftest = subparsers.add_parser('selftest', help='运行梯度、MM 条件、穷举网格等自检')
    selftest.add_argument('--seed', type=int, help='主随机种子')
    selftest.add_argument('--quiet', action='store_true', help='只输出最终结论')
    return parser


def _add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--config', type=str, help='实验配置文件 (JSON 或 YAML)')
    parser.add_argument('--seed', type=int, help='主随机种子')
    parser.add_argument('--out', type=str, help=f'输出目录 (默认: {OUTPUT_DIR})')
    parser.add_argument('--snapshots', type=int, help='几何快照数')
    parser.add_argument('--eval-realizations', type=int, help='每个快照的评估信道实现数')
    parser.add_argument('--schemes', type=str, nargs='+', help='方案 (可选: ssca smm random)')
    parser.add_argument('--max-iters', type=int, help='两个优化器的最大迭代次数')
    parser.add_argument('--tau-ssca', type=float, nargs='+', help='SSCA 的 τ；给出多个值时逐个运行')
    parser.add_argument('--tau-smm', type=float, help='SMM 的 τ')
    parser.add_argument('--quiet', action='store_true', help='不打印逐快照进度')


def build_overrides(args: argparse.Namespace, tau_ssca: Optional[float] = None) -> Dict:
    """把命令行参数转换为与配置文件结构一致的覆盖项"""
    overrides: Dict = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.snapshots is not None:
        overrides['num_snapshots'] = args.snapshots
    if args.eval_realizations is not None:
        overrides['num_eval_realizations'] = args.eval_realizations
    if args.schemes:
        overrides['schemes'] = list(args.schemes)
    if args.max_iters is not None:
        overrides['ssca'] = {'max_iters': args.max_iters}
        overrides['smm'] = {'max_iters': args.max_iters}
    if tau_ssca is not None:
        overrides = merge_dicts(overrides, {'ssca': {'tau': tau_ssca}})
    if args.tau_smm is not None:
        overrides = merge_dicts(overrides, {'smm': {'tau': args.tau_smm}})
    return overrides


def tau_output_dir(out_dir: str, tau: float) -> str:
    """τ 扫描时每个取值的输出子目录"""
    return os.path.join(out_dir, f"tau_{tau:g}")


def load_specs(args: argparse.Namespace) -> List[tuple]:
    """
    解析出需要运行的 (实验描述, 输出目录) 列表

    Raises:
        ConfigError / ValueError / FileNotFoundError: 配置无效
    """
    mode = SUBCOMMAND_MODES[args.command]
    out_dir = args.out or OUTPUT_DIR
    taus = args.tau_ssca or [None]
    specs = []
    for tau in taus:
        spec = load_experiment_spec(mode, args.config, build_overrides(args, tau))
        target = tau_output_dir(out_dir, tau) if len(taus) > 1 else out_dir
        specs.append((spec, target))
    return specs


def run_sweep(spec: ExperimentSpec, out_dir: str, quiet: bool):
    """运行一次扫描并写出 CSV、JSON 与 HTML 报告"""
    result = ExperimentRunner(spec, verbose=not quiet).run()
    csv_path, json_path = emit_results(result, out_dir)
    report_path = HTMLReportGenerator(out_dir).generate_results_report(result)
    if not quiet:
        print_summary(result)
    print(f"📄 结果已保存至: {csv_path}")
    print(f"📝 溯源文件: {json_path}")
    print(f"🌐 HTML 报告: {report_path}")


def run_converge(spec: ExperimentSpec, out_dir: str, args: argparse.Namespace):
    """在一个快照上运行两个优化器并写出轨迹"""
    traces = ExperimentRunner(spec, verbose=not args.quiet).trace_single_snapshot(args.point, args.snapshot)
    for name, trace in traces.items():
        path = write_trace_csv(trace, os.path.join(out_dir, f"{name}_trace.csv"))
        print(f"📄 {name.upper()} 轨迹已保存至: {path} ({trace.iterations} 行, {trace.stop_reason})")


def run_selftest(args: argparse.Namespace) -> int:
    """运行自检，全部通过返回 0"""
    kwargs = {} if args.seed is None else {'seed': args.seed}
    results = run_self_checks(verbose=not args.quiet, **kwargs)
    failed = [r for r in results if not r.passed]
    print("=" * 60)
    if failed:
        print(f"❌ 自检失败: {len(failed)}/{len(results)} 项 ({', '.join(r.name for r in failed)})")
        return EXIT_FAILURE
    print(f"✅ 自检通过: {len(results)}/{len(results)} 项")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """主函数，返回进程退出码"""
    args = build_parser().parse_args(argv)
    if not args.quiet:
        print_banner()

    try:
        if args.command == 'selftest':
            return run_selftest(args)

        try:
            specs = load_specs(args)
        except (ConfigError, ValueError, FileNotFoundError) as e:
            print(f"❌ 配置错误: {e}")
            return EXIT_CONFIG

        for spec, out_dir in specs:
            if len(specs) > 1:
                print(f"\n🔍 SSCA τ = {spec.ssca.tau:g} -> {out_dir}")
            if args.command == 'converge':
                run_converge(spec, out_dir, args)
            else:
                run_sweep(spec, out_dir, args.quiet)

        print("\n✅ 仿真完成！")
        return EXIT_OK

    except KeyboardInterrupt:
        print("\n\n⚠️  用户中断仿真")
        return EXIT_OK
    except OSError as e:
        print(f"\n❌ 文件读写失败: {e}")
        return EXIT_IO
    except Exception as e:
        print(f"\n❌ 仿真过程中发生错误: {e}")
        import traceback
        traceback.print_exc()
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
