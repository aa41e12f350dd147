"""Configuration settings for the Toda Ward Lab.

Customize these settings to adjust tolerances, Monte Carlo defaults and where
reports are written. A local ``.env`` file may override the values marked
below through environment variables.
"""
import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

# Base directory for the project
BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

# Report storage (override with TODA_LAB_OUTPUT_DIR)
OUTPUT_DIR = os.environ.get("TODA_LAB_OUTPUT_DIR", os.path.join(BASE_DIR, "lab_output"))

# Report schema
SCHEMA_VERSION = "1.0"

# Logging level (override with TODA_LAB_LOG_LEVEL)
# Options: 'DEBUG' for per-identity / per-chain detail, 'INFO' for suite summaries
LOGGING_LEVEL = os.environ.get("TODA_LAB_LOG_LEVEL", "INFO")

# Worker threads for identity fan-out and Monte Carlo chains (override with TODA_LAB_THREADS)
THREADS = max(1, int(os.environ.get("TODA_LAB_THREADS", "4")))

# Coupling range
GAMMA_MAX_SQUARED = 2  # gamma must satisfy 0 < gamma < sqrt(2)

# Symbolic engine
WITNESS_ATTEMPTS = 64  # random rational points tried when looking for a nonzero witness
WITNESS_RANGE = 97  # integer coordinates drawn from [-WITNESS_RANGE, WITNESS_RANGE]
WITNESS_SEED = 0

# Monte Carlo defaults (McParams)
DEFAULT_SAMPLES = 2000
DEFAULT_CHAINS = 4
DEFAULT_SEED = 20240101
DEFAULT_BULK_GRID = (16, 8)  # (nx, ny) cells of the bulk box
DEFAULT_BOUNDARY_POINTS = 32
DEFAULT_DELTA = 0.05  # bulk cut-off above the real line
DEFAULT_EPSILON = 0.1  # exclusion radius around insertions
DEFAULT_REGULARIZATION = 0.05  # kernel regularization scale
DEFAULT_BOX_RADIUS = 4.0  # half-width of the simulated domain
DEFAULT_ZERO_MODE_POINTS = 801  # Simpson nodes per zero-mode direction
DEFAULT_ZERO_MODE_RADIUS = 40.0  # right cut where the bulk potential mu*A*e^(gamma*u) reaches this value
DEFAULT_BATCH_SIZE = 256  # field draws generated per block inside a chain
DEFAULT_TAIL_TOLERANCE = 1e-8  # maximum relative tail mass allowed
ZERO_MODE_LEFT_CUT = 1e-3  # left cut where the potential has fallen to this size
ZERO_MODE_SERIES_ORDER = 3  # terms of the analytic left-tail expansion

# Covariance factorization
JITTER_START = 1e-12  # relative to the largest diagonal entry
JITTER_GROWTH = 10.0
JITTER_CAP = 1e-6
FACTORIZATION_TOLERANCE = 1e-8

# Statistical verdicts
STDERR_MULTIPLIER = 3.0
RELATIVE_TOLERANCE = 0.05  # relative slack for the regularized stress-tensor identity
FUSION_TOLERANCE = 0.15
FUSION_CI_CAP = 0.5  # widest acceptable 95% interval on a fitted exponent
FINITE_DIFFERENCE_STEP = 1e-3
QUADRATURE_TOLERANCE = 1e-6  # relative slack for identities that hold pathwise

# Catalog entries reported but never failing a run
INFORMATIONAL_IDENTITIES = ("vertex-pair-a",)


def get_output_path(kind: str, output_dir: Optional[str] = None) -> str:
    """Get the directory for a report kind, creating it if needed.

    Args:
        kind: 'reports' for JSON summaries, 'tables' for CSV output
        output_dir: Optional run directory replacing OUTPUT_DIR

    Returns:
        Path to the output directory
    """
    base_dir = output_dir or OUTPUT_DIR
    if kind in ('reports', 'tables'):
        base_dir = os.path.join(base_dir, kind)

    os.makedirs(base_dir, exist_ok=True)
    return base_dir
