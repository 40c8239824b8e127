"""
结果输出模块
写出 CSV 汇总表与 JSON 溯源文件，内容只依赖实验描述与种子（不含时间戳）
"""
import csv
import json
import os
import subprocess
from typing import Dict, Tuple

from config import (
    DEFAULT_EPSILON, DEFAULT_MAX_ITERS, DEFAULT_SSCA_ALPHA, DEFAULT_SSCA_BETA,
    DEFAULT_SSCA_EPSILON, DEFAULT_TAU_SMM, DEFAULT_TAU_SSCA, PATH_LOSS_INTERCEPT_DB,
    PATH_LOSS_SLOPE_DB, RESULTS_CSV_NAME, RESULTS_JSON_NAME, VERSION,
)
from experiment_runner import ExperimentResult

CSV_COLUMNS = ['scheme', 'sweep_value', 'mean_rate_bps_hz', 'stderr', 'n_snapshots']


def version_string() -> str:
    """
    git describe 风格的版本号，不在 git 仓库中时退回 v<VERSION>
    """
    repo_dir = os.path.dirname(os.path.abspath(__file__))
    try:
        output = subprocess.run(
            ['git', 'describe', '--tags', '--always', '--dirty'],
            cwd=repo_dir, capture_output=True, text=True, timeout=5,
        )
        if output.returncode == 0 and output.stdout.strip():
            return output.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{VERSION}"


def resolved_defaults() -> Dict:
    """写入溯源文件的内置默认值"""
    return {
        'ssca_tau': DEFAULT_TAU_SSCA,
        'ssca_alpha': DEFAULT_SSCA_ALPHA,
        'ssca_beta': DEFAULT_SSCA_BETA,
        'smm_tau': DEFAULT_TAU_SMM,
        'ssca_epsilon': DEFAULT_SSCA_EPSILON,
        'smm_epsilon': DEFAULT_EPSILON,
        'max_iters': DEFAULT_MAX_ITERS,
        'path_loss_db': f"{PATH_LOSS_INTERCEPT_DB} + {PATH_LOSS_SLOPE_DB} lg d",
        'path_loss_applied_per_hop': True,
        'rate_log_base': 2,
        'tx_power_unit': 'dBm',
    }


def _format_number(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(result: ExperimentResult, out_dir: str) -> Tuple[str, str]:
    """
    写出结果文件

    Args:
        result: 实验结果
        out_dir: 输出目录

    Returns:
        (CSV 路径, JSON 路径)

    Raises:
        OSError: 写文件失败（信息中带路径）
    """
    csv_path = os.path.join(out_dir, RESULTS_CSV_NAME)
    json_path = os.path.join(out_dir, RESULTS_JSON_NAME)

    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OSError(f"无法创建输出目录: {out_dir}: {e}") from e

    try:
        with open(csv_path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(CSV_COLUMNS)
            for record in result.records:
                writer.writerow([
                    record.scheme,
                    _format_number(record.sweep_value),
                    _format_number(record.mean_rate),
                    _format_number(record.stderr),
                    record.n_snapshots,
                ])
    except OSError as e:
        raise OSError(f"写入 CSV 失败: {csv_path}: {e}") from e

    sidecar = {
        'version': version_string(),
        'seed': result.spec.seed,
        'spec': result.spec.to_dict(),
        'resolved_defaults': resolved_defaults(),
        'records': [
            {
                'scheme': r.scheme,
                'sweep_value': r.sweep_value,
                'per_snapshot_rates': r.per_snapshot_rates,
                'iteration_counts': r.iteration_counts,
                'stop_reasons': r.stop_reasons,
                'descent_violations': r.descent_violations,
            }
            for r in result.records
        ],
    }
    try:
        with open(json_path, 'w', encoding='utf-8') as f:
            json.dump(sidecar, f, indent=2, ensure_ascii=False)
            f.write('\n')
    except OSError as e:
        raise OSError(f"写入 JSON 失败: {json_path}: {e}") from e

    return csv_path, json_path
