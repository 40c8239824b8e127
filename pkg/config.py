"""
配置文件 - RIS 统计信道相位优化仿真器
"""
import os
from dotenv import load_dotenv

# 加载环境变量
load_dotenv()

VERSION = '1.0.0'

# 随机种子（主种子，派生所有子随机流）
DEFAULT_SEED = int(os.getenv('RIS_SEED', 2020))
OUTPUT_DIR = os.getenv('OUTPUT_DIR', './sim_results')

# ===== 系统参数默认值 =====
DEFAULT_NUM_ANTENNAS = 4         # M
DEFAULT_NUM_RIS = 2              # K
DEFAULT_ELEMENTS_PER_RIS = 20    # N
DEFAULT_RICIAN_FACTOR = 10.0     # ρ（线性值）
DEFAULT_NUM_PATHS = 5            # L
DEFAULT_DISTANCE_M = 10.0
DEFAULT_BANDWIDTH_HZ = 2e5
DEFAULT_NOISE_PSD_DBM_HZ = -170.0
DEFAULT_TX_POWER_DBM = -5.0

# 路径损耗模型: PL = 38.46 + 20 lg d (dB)
PATH_LOSS_INTERCEPT_DB = 38.46
PATH_LOSS_SLOPE_DB = 20.0

# ===== 实验协议 =====
DEFAULT_NUM_SNAPSHOTS = int(os.getenv('RIS_SNAPSHOTS', 100))
DEFAULT_NUM_EVAL_REALIZATIONS = int(os.getenv('RIS_EVAL_REALIZATIONS', 100))

# 发射功率扫描 (dBm)
POWER_SWEEP_DBM = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]
# RIS 数量扫描: 固定 NK=64
RIS_COUNT_SWEEP_TOTAL = 64
RIS_COUNT_SWEEP_VALUES = [1, 2, 4, 8]
# 莱斯因子扫描（线性值）
RICIAN_SWEEP_FACTORS = [0.0, 1.0, 10.0, 100.0]

# 支持的方案
SUPPORTED_SCHEMES = ['ssca', 'smm', 'random']
DEFAULT_SCHEMES = ['ssca', 'smm', 'random']

# ===== 优化器参数 =====
DEFAULT_MAX_ITERS = int(os.getenv('RIS_MAX_ITERS', 5000))
DEFAULT_EPSILON = float(os.getenv('RIS_EPSILON', 0.01))

# SSCA: ρ^(i) = i^-β, γ^(i) = i^-α，需要 0.5 <= β <= 1 且 β < α <= 1
# τ 需远小于对数速率在 φ 上的曲率（约 2/NK）
DEFAULT_TAU_SSCA = float(os.getenv('RIS_TAU_SSCA', 0.005))
# 代理函数差值单位为 nat，独立于 SMM 的阈值
DEFAULT_SSCA_EPSILON = float(os.getenv('RIS_SSCA_EPSILON', 1e-4))
DEFAULT_SSCA_ALPHA = 0.9
DEFAULT_SSCA_BETA = 0.6

# SMM: τ 取任意小正数即可
DEFAULT_TAU_SMM = float(os.getenv('RIS_TAU_SMM', 1e-6))

# 数值容差
UNIT_MODULUS_TOL = 1e-12
DESCENT_TOL = 1e-9

# 输出文件名
RESULTS_CSV_NAME = 'results.csv'
RESULTS_JSON_NAME = 'results.json'
RESULTS_HTML_NAME = 'report.html'
