"""
Configuration module for loading environment variables.

Every knob can be overridden through the environment or a local ``.env`` file.
"""

import logging
import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Numerical tolerances
VALIDITY_TOL = float(os.getenv("QET_VALIDITY_TOL", "1e-10"))
EIGEN_TOL = float(os.getenv("QET_EIGEN_TOL", "1e-9"))
STATE_TOL = float(os.getenv("QET_STATE_TOL", "1e-8"))
PASSIVITY_TOL = float(os.getenv("QET_PASSIVITY_TOL", "1e-6"))

# Protocol bookkeeping
TIMING_MARGIN = float(os.getenv("QET_TIMING_MARGIN", "10"))
AN_ENERGY_SCALE = float(os.getenv("QET_AN_ENERGY_SCALE", "0.0"))

# Relaxation model. T1 and T2 are placeholders rather than measured values;
# pass real ones for quantitative studies.
DEFAULT_T1 = float(os.getenv("QET_DEFAULT_T1", "10.0"))
DEFAULT_T2 = float(os.getenv("QET_DEFAULT_T2", "1.0"))
DEFAULT_DT = float(os.getenv("QET_DT", "2e-6"))

# Gate durations in seconds (An-mediated preparation, U_AnA, U_BAn)
T_PREP = float(os.getenv("QET_T_PREP", "0.026"))
T_ANA = float(os.getenv("QET_T_ANA", "0.010"))
T_BAN = float(os.getenv("QET_T_BAN", "0.004"))

# NMR coupling constants of the three-carbon register, in Hz
J_AB = float(os.getenv("QET_J_AB", "1.16"))
J_ANA = float(os.getenv("QET_J_ANA", "72.27"))
J_BAN = float(os.getenv("QET_J_BAN", "69.68"))
T_PULSE = float(os.getenv("QET_T_PULSE", "0.0095"))

# Sweep execution
SWEEP_WORKERS = int(os.getenv("QET_SWEEP_WORKERS", "1"))

LOG_LEVEL = os.getenv("QET_LOG_LEVEL", "WARNING").upper()


def configure_logging(level: str | None = None) -> None:
    """Install a root handler once; later calls only adjust the level."""
    level = (level or LOG_LEVEL).upper()
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logging.getLogger().setLevel(level)
