#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
HTML报告生成模块
"""
import html
import os

from config import OUTPUT_DIR, RESULTS_HTML_NAME
from experiment_runner import SCHEME_NAMES, ExperimentResult, power_gain_db, scheme_parity
from experiment_spec import SWEEP_POWER, SWEEP_RICIAN, SWEEP_RIS_COUNT

SWEEP_LABELS = {
    SWEEP_POWER: '发射功率 P_T (dBm)',
    SWEEP_RIS_COUNT: 'RIS 数量 K（NK 固定）',
    SWEEP_RICIAN: '莱斯因子 ρ',
}


class HTMLReportGenerator:
    """HTML仿真报告生成器"""

    def __init__(self, output_dir: str = OUTPUT_DIR):
        """
        初始化HTML报告生成器

        Args:
            output_dir: 输出目录
        """
        self.output_dir = output_dir
        self._ensure_output_dir()

    def _ensure_output_dir(self):
        """确保输出目录存在"""
        if not os.path.exists(self.output_dir):
            os.makedirs(self.output_dir)

    def generate_results_report(self, result: ExperimentResult) -> str:
        """
        生成仿真结果HTML报告

        Args:
            result: 实验结果

        Returns:
            报告文件路径
        """
        filepath = os.path.join(self.output_dir, RESULTS_HTML_NAME)
        html_content = self._generate_html(result)
        try:
            with open(filepath, 'w', encoding='utf-8') as f:
                f.write(html_content)
        except OSError as e:
            raise OSError(f"写入 HTML 报告失败: {filepath}: {e}") from e
        return filepath

    def _generate_html(self, result: ExperimentResult) -> str:
        """生成HTML内容"""
        spec = result.spec
        system = spec.system
        info_html = self._generate_info_html([
            ('扫描模式', SWEEP_LABELS[spec.sweep.mode]),
            ('天线数 M', system.M),
            ('RIS 数 K / 单元数 N', f"{system.K} / {system.N}"),
            ('莱斯因子 ρ', system.rician_factor),
            ('快照 x 评估实现', f"{spec.num_snapshots} x {spec.num_eval_realizations}"),
            ('随机种子', spec.seed),
        ])
        table_html = self._generate_table_html(result)
        findings_html = self._generate_findings_html(result)

        return f"""<!DOCTYPE html>
<html lang="zh-CN">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>RIS 相位优化仿真报告</title>
    <style>
        * {{
            margin: 0;
            padding: 0;
            box-sizing: border-box;
        }}

        body {{
            font-family: -apple-system, BlinkMacSystemFont, "Segoe UI", Roboto, "Helvetica Neue", Arial, sans-serif;
            background: linear-gradient(135deg, #667eea 0%, #764ba2 100%);
            padding: 20px;
            line-height: 1.6;
        }}

        .container {{
            max-width: 1200px;
            margin: 0 auto;
            background: white;
            border-radius: 10px;
            box-shadow: 0 10px 40px rgba(0,0,0,0.2);
            overflow: hidden;
        }}

        .header {{
            background: linear-gradient(135deg, #667eea 0%, #764ba2 100%);
            color: white;
            padding: 40px;
            text-align: center;
        }}

        .content {{
            padding: 40px;
        }}

        .info-grid {{
            display: grid;
            grid-template-columns: repeat(auto-fit, minmax(250px, 1fr));
            gap: 20px;
            margin-bottom: 40px;
        }}

        .info-card {{
            background: #f8f9fa;
            padding: 20px;
            border-radius: 8px;
            border-left: 4px solid #667eea;
        }}

        .info-card .label {{
            color: #6c757d;
            font-size: 14px;
        }}

        .info-card .value {{
            font-size: 22px;
            font-weight: bold;
            color: #333;
        }}

        .section-title {{
            font-size: 22px;
            margin: 20px 0;
            color: #333;
        }}

        table {{
            width: 100%;
            border-collapse: collapse;
        }}

        th, td {{
            padding: 10px;
            border-bottom: 1px solid #e0e0e0;
            text-align: right;
        }}

        th {{
            background: #f8f9fa;
        }}
    </style>
</head>
<body>
    <div class="container">
        <div class="header">
            <h1>📡 RIS 相位优化仿真报告</h1>
            <div class="subtitle">统计信道状态信息下的多 RIS 单用户 MISO 下行链路</div>
        </div>
        <div class="content">
            {info_html}
            {table_html}
            {findings_html}
        </div>
    </div>
</body>
</html>
"""

    def _generate_info_html(self, items) -> str:
        """生成参数卡片"""
        cards = [
            f'<div class="info-card"><div class="label">{self._escape_html(label)}</div>'
            f'<div class="value">{self._escape_html(value)}</div></div>'
            for label, value in items
        ]
        return '<div class="info-grid">' + '\n'.join(cards) + '</div>'

    def _generate_table_html(self, result: ExperimentResult) -> str:
        """生成平均速率表"""
        spec = result.spec
        html_parts = ['<h2 class="section-title">📊 平均速率 (bit/s/Hz)</h2>', '<table>', '<tr>',
                      f'<th>{self._escape_html(SWEEP_LABELS[spec.sweep.mode])}</th>']
        for scheme in spec.schemes:
            html_parts.append(f'<th>{self._escape_html(SCHEME_NAMES[scheme])}</th>')
        html_parts.append('</tr>')

        for value in spec.sweep.values:
            html_parts.append(f'<tr><td>{self._escape_html(value)}</td>')
            for scheme in spec.schemes:
                record = result.get(scheme, value)
                cell = f"{record.mean_rate:.4f} ± {record.stderr:.4f}" if record else '-'
                html_parts.append(f'<td>{cell}</td>')
            html_parts.append('</tr>')

        html_parts.append('</table>')
        return '\n'.join(html_parts)

    def _generate_findings_html(self, result: ExperimentResult) -> str:
        """生成结论要点"""
        spec = result.spec
        items = []
        if 'ssca' in spec.schemes and 'smm' in spec.schemes:
            parity = scheme_parity(result)
            if parity is not None:
                items.append(f"SSCA 与 SMM 逐快照速率相差 5% 以内的比例: {parity * 100:.1f}%")
        if spec.sweep.mode == SWEEP_POWER and 'random' in spec.schemes:
            for scheme in ('ssca', 'smm'):
                if scheme in spec.schemes:
                    gain = power_gain_db(result, scheme)
                    if gain is not None:
                        items.append(f"{SCHEME_NAMES[scheme]} 达到随机相位 10 dBm 速率所需功率节省 {gain:.2f} dB")
        if not items:
            return ''
        lis = '\n'.join(f'<li>{self._escape_html(item)}</li>' for item in items)
        return f'<h2 class="section-title">💡 结论要点</h2><ul>{lis}</ul>'

    @staticmethod
    def _escape_html(value) -> str:
        """转义HTML特殊字符"""
        return html.escape(str(value))
