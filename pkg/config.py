"""
Configuration file for the density estimation toolkit
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


# Estimator defaults (kernel parameter alpha = 0.01, no deconvolution threshold)
DEFAULT_ALPHA = _env_float("TDE_ALPHA", 0.01)
DEFAULT_LAMBDA = _env_float("TDE_LAMBDA", 0.0)
DEFAULT_ALPHA_C = _env_float("TDE_ALPHA_C", 1.0)
DEFAULT_RANK = _env_int("TDE_RANK", 3)
DEFAULT_NBASIS = _env_int("TDE_NBASIS", 17)

# Sketch sizes per compression algorithm
SKETCH_SIZES = {
    "svd_kn": _env_int("TDE_RTILDE_KN", 100),
    "svd_c_hier": _env_int("TDE_RTILDE_HIER", 10),
    "rsvd_t": _env_int("TDE_RTILDE_RSVD", 30),
}
PINV_REL_TOL = _env_float("TDE_PINV_REL_TOL", 1e-10)

# Experiment boxes
GM_HALF_WIDTH = _env_float("TDE_GM_L", 1.5)
GM_MESH = _env_float("TDE_GM_MESH", 0.1)
GL_MESH = _env_float("TDE_GL_MESH", 0.05)

# Oracle and kernel limits
MEMORY_CAP_ENTRIES = _env_int("TDE_MEMORY_CAP", 2 ** 24)
FAST_BLOCK_SIZE = _env_int("TDE_FAST_BLOCK", 1024)
SAMPLER_CHUNK = _env_int("TDE_SAMPLER_CHUNK", 4096)

# Langevin defaults (step is divided by beta)
LANGEVIN_STEP = _env_float("TDE_LANGEVIN_STEP", 5e-3)
LANGEVIN_BURN_IN = _env_int("TDE_LANGEVIN_BURN_IN", 10_000)
LANGEVIN_THINNING = _env_int("TDE_LANGEVIN_THINNING", 10)
LANGEVIN_CHAINS = _env_int("TDE_LANGEVIN_CHAINS", 128)
# Metropolis-adjusted moves remove the step-size bias of plain Euler-Maruyama
LANGEVIN_METROPOLIS = os.getenv("TDE_LANGEVIN_METROPOLIS", "false").lower() == "true"

# Output locations
LOG_FILE = os.getenv("TDE_LOG_FILE", "logs/tde.log")
METRICS_FILE = os.getenv("TDE_METRICS_FILE", "logs/metrics.jsonl")

# Acceptance-scale tests are opt-in
RUN_SLOW_TESTS = os.getenv("TDE_RUN_SLOW", "false").lower() == "true"


def get_default_alpha():
    """Get the configured kernel parameter"""
    return DEFAULT_ALPHA


def get_sketch_size(algo: str):
    """Get the default sketch size for a compression algorithm (None if unused)"""
    return SKETCH_SIZES.get(algo)


def get_memory_cap():
    """Get the entry cap for dense oracle tensors"""
    return MEMORY_CAP_ENTRIES


def get_langevin_defaults():
    """Get Langevin step, burn-in, thinning, chain count and the Metropolis switch"""
    return {
        "step": LANGEVIN_STEP,
        "burn_in": LANGEVIN_BURN_IN,
        "thinning": LANGEVIN_THINNING,
        "n_chains": LANGEVIN_CHAINS,
        "metropolis": LANGEVIN_METROPOLIS,
    }


def get_log_file():
    """Get the structured log path"""
    return LOG_FILE


def get_metrics_file():
    """Get the metrics JSON-lines path"""
    return METRICS_FILE


def run_slow_tests():
    """Check if acceptance-scale tests are enabled"""
    return RUN_SLOW_TESTS
