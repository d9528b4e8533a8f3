"""
Process configuration for tvising.

Settings come from the environment (optionally a local .env file, see
.env.example). Library defaults that several modules share live here too.
"""

import os

from dotenv import load_dotenv

load_dotenv()

# ── Environment ──────────────────────────────────────────
THREADS = int(os.getenv("TVISING_THREADS") or os.cpu_count() or 1)
LOG_LEVEL = os.getenv("TVISING_LOG_LEVEL", "WARNING").upper()

# ── Enumeration limits ───────────────────────────────────
MAX_JOINT_P = 20   # exact Z(Ω) by 2^p enumeration
MAX_TABLE_P = 12   # full probability table

# ── Sampling defaults ────────────────────────────────────
DEFAULT_BURN_IN = 1000  # sweeps
DEFAULT_LAG = 20        # sweeps between emitted states

# ── Estimation thresholds ────────────────────────────────
DEFAULT_TAU_CP = 1e-8
DEFAULT_TAU_SPARSE = 1e-6

# ── Hyperparameter search ────────────────────────────────
DEFAULT_LAMBDA1_RANGE = (4.0, 15.0)
DEFAULT_LAMBDA2_RANGE = (30.0, 40.0)


def worker_count(requested: int | None = None) -> int:
    """Cap a requested worker count by TVISING_THREADS."""
    if requested is None:
        return max(1, THREADS)
    return max(1, min(requested, THREADS))
