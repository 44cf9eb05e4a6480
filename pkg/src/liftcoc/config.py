"""Constants and configuration for the cocycle engine."""

import os
from pathlib import Path

from src.liftcoc.errors import ConfigError

# ── Truncation ───────────────────────────────────────────────────────────

DEFAULT_DEPTH = 8  # drop monomials with any exponent below -DEFAULT_DEPTH
STABILITY_SLACK = 2  # re-evaluate at depth + slack to certify a value
DEPTH_ENV_VAR = "LIFTCOC_DEPTH"
SCAN_DEPTH = 32  # provisional parse depth used to size the default depth

# ── Random instances ─────────────────────────────────────────────────────

DEFAULT_SEED = 20240611
DEFAULT_TRIALS = 20
DEFAULT_GL_WINDOW = 2  # gl_M window of the finite matrices
DEFAULT_MAX_DEGREE = 2  # total degree of random polynomial entries
COEFF_RANGE = (-3, 3)  # inclusive, zero skipped

# ── Cycle search ─────────────────────────────────────────────────────────

MAX_WEDGE_DIMENSION = 5000  # columns of the boundary matrix

# ── Experiments ──────────────────────────────────────────────────────────

DEFAULT_LAMBDAS = (-2, -1, 0, 1, 2, 3)
SLOW_N_THRESHOLD = 3  # n >= this needs allow_slow

# ── Persistence ──────────────────────────────────────────────────────────

REPORT_DIR = Path(".liftcoc_reports")
REPORT_FILE = REPORT_DIR / "reports.json"


def resolve_depth(explicit: int | None = None, fallback: int | None = None) -> int:
    """Explicit value, then $LIFTCOC_DEPTH, then `fallback`, then DEFAULT_DEPTH."""
    if explicit is not None:
        depth = explicit
    elif raw := os.environ.get(DEPTH_ENV_VAR):
        try:
            depth = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{DEPTH_ENV_VAR}={raw!r} is not an integer") from exc
    elif fallback is not None:
        depth = fallback
    else:
        depth = DEFAULT_DEPTH

    if depth < 1:
        raise ConfigError(f"truncation depth must be >= 1, got {depth}")
    return depth
