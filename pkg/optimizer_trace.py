"""
优化器迭代轨迹
"""
import csv
import os
from dataclasses import dataclass, field
from typing import List, Tuple

# 终止原因
STOP_CONVERGED = 'converged'
STOP_MAX_ITERS = 'max_iters'
STOP_TRUNCATED = 'truncated'


@dataclass
class OptimizerTrace:
    """逐次迭代的诊断记录，columns 给出每行的字段名"""

    columns: Tuple[str, ...]
    rows: List[tuple] = field(default_factory=list)
    stop_reason: str = STOP_MAX_ITERS

    def append(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"轨迹记录字段数不符: 期望 {len(self.columns)}，实际 {len(values)}")
        self.rows.append(tuple(values))

    @property
    def iterations(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        """取出某一列"""
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def write_trace_csv(trace: OptimizerTrace, path: str) -> str:
    """
    把轨迹写为 CSV（表头 + 每次迭代一行）

    Args:
        trace: 优化器轨迹
        path: 输出文件路径

    Returns:
        文件路径
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    try:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(trace.columns)
            for row in trace.rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    except OSError as e:
        raise OSError(f"写入轨迹文件失败: {path}: {e}") from e
    return path
