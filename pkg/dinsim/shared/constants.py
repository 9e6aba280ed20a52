"""Environment-driven settings and domain constants."""

from __future__ import annotations

import os


def _env(key: str, default: str = "") -> str:
    return os.environ.get(key, default)


def _env_int(key: str, default: int) -> int:
    raw = _env(key)
    try:
        value = int(raw) if raw else default
    except ValueError:
        return default
    return value if value > 0 else default


# ---- Application ----
APP_NAME: str = _env("APP_NAME", "dinsim")
LOG_LEVEL: str = _env("DINSIM_LOG_LEVEL", "WARNING")
LOG_FORMAT: str = "%(asctime)s %(levelname)s %(message)s"

# ---- Parallelism ----
THREADS: int = _env_int("DINSIM_THREADS", os.cpu_count() or 1)

# ---- Calendar ----
DAYS_PER_MONTH: int = 30
MONTHS_PER_YEAR: int = 12
DAYS_PER_YEAR: int = DAYS_PER_MONTH * MONTHS_PER_YEAR
NEGOTIATION_WINDOW_DAYS: int = 30

# ---- Money ----
MONEY_PLACES: int = 4

# ---- Multiple of original capital ----
MOC_MIN: float = 2.0
MOC_MAX: float = 47.0
MOC_MODEL_LOW: float = 30.0
MOC_MODEL_HIGH: float = 43.0

# ---- Modeling defaults ----
DEFAULT_PREMIUM_RATE: float = 0.05
DEFAULT_EQUITY_SHARE: float = 0.50
DEFAULT_COVERAGE: float = 1.0
REFERENCE_CLAWBACK_RATE: float = 0.623
DEFAULT_HORIZON_YEARS: int = 10
DEFAULT_LIEN_HORIZON_MONTHS: int = 12

# ---- Return axis ----
RHO_TOP: float = 1.5
NORMAL_RANGE: tuple[float, float] = (0.9, 1.5)
ZERO_FUNDS_RANGE: tuple[float, float] = (2.27, 8.00)
GRID_START: float = 0.0
GRID_STOP: float = 8.0
GRID_STEP: float = 0.01

# ---- Break-even levels ----
BANK_BREAK_EVEN: float = 1.0
UNDERWRITER_BREAK_EVEN: float = 0.0
