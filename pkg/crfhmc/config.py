import logging
import os

import pytz

logger = logging.getLogger(__name__)

# --- 数据目录与数据库 ---
DATA_DIR = os.environ.get("CRFHMC_DATA_DIR", "./data")
DATABASE_URL = os.environ.get(
    "CRFHMC_DATABASE_URL", f"sqlite+aiosqlite:///{DATA_DIR}/verification.db"
)

LOG_LEVEL = os.environ.get("CRFHMC_LOG_LEVEL", "").upper() or None

# --- 穷举与校验默认值 ---
DEFAULT_BUDGET_STR = "1000000"
DEFAULT_TOLERANCE_STR = "1e-9"

try:
    DEFAULT_BUDGET = int(os.environ.get("CRFHMC_BUDGET", DEFAULT_BUDGET_STR))
    if DEFAULT_BUDGET < 1:
        raise ValueError("budget must be positive")
except ValueError as e:
    logger.warning(f"Invalid CRFHMC_BUDGET: {e}. Falling back to {DEFAULT_BUDGET_STR}.")
    DEFAULT_BUDGET = int(DEFAULT_BUDGET_STR)

try:
    DEFAULT_TOLERANCE = float(os.environ.get("CRFHMC_TOLERANCE", DEFAULT_TOLERANCE_STR))
    if not DEFAULT_TOLERANCE >= 0.0:
        raise ValueError("tolerance must be non-negative")
except ValueError as e:
    logger.warning(f"Invalid CRFHMC_TOLERANCE: {e}. Falling back to {DEFAULT_TOLERANCE_STR}.")
    DEFAULT_TOLERANCE = float(DEFAULT_TOLERANCE_STR)

# --- 时区 (用于记录校验时间) ---
TIMEZONE_NAME = os.environ.get("CRFHMC_TIMEZONE", "UTC")
try:
    TIMEZONE = pytz.timezone(TIMEZONE_NAME)
except pytz.UnknownTimeZoneError:
    logger.warning(f"Unknown CRFHMC_TIMEZONE '{TIMEZONE_NAME}'. Falling back to UTC.")
    TIMEZONE = pytz.utc

# HMC 行和的容差 (构造时检查)
STOCHASTIC_TOLERANCE = 1e-9

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(default_level: int = logging.WARNING, verbose: bool = False):
    """入口处调用一次, 配置根日志。"""
    if verbose:
        level = logging.DEBUG
    elif LOG_LEVEL is not None:
        level = getattr(logging, LOG_LEVEL, default_level)
    else:
        level = default_level
    logging.basicConfig(level=level, format=LOG_FORMAT)
