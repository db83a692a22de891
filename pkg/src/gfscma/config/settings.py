"""Library configuration and settings."""

import os
from pathlib import Path

# Base directory of the project
BASE_DIR = Path(__file__).resolve().parent.parent.parent.parent

# Series kernels
TERM_BUDGET = 500
SERIES_RTOL = 1e-16
SERIES_STREAK = 3  # consecutive small terms before a series is declared converged
CANCELLATION_LIMIT = 1e7  # largest term over |sum| a floating-point series may reach
SERIES_LOSS_DIGITS = 4.0  # 1F1 leaves plain summation once more digits than this would cancel
HYP1F1_ASYMPTOTIC_RADIUS = 30.0
ASYMPTOTIC_SERIES_RTOL = 1e-10

# Gil-Pelaez quadrature
PANEL_TOL = 1e-10
PANEL_FAILURE_TOL = 1e-6  # reported panel error above this is fatal
ENVELOPE_TOL = 1e-12
ENVELOPE_DECADES = 3
FIRST_PANEL_EXPONENT = -16
MAX_PANELS = 160
QUAD_LIMIT = 200
OSCILLATION_PERIODS = 8  # panels holding more periods than this use weighted rules
CLAMP_SLACK = 1e-6
INTRA_CLOSED_FORM_LIMIT = 1e4  # largest |1 - j omega rho|^(d_s (J-1)) evaluated in closed form
DECAY_CHECK_FREQUENCY = 2.0 ** 20  # in units of 1/scale; a CF still above DECAY_CHECK_MODULUS there is demodulated
DECAY_CHECK_MODULUS = 1e-3
CENTRE_STEP = 1e-6  # in units of 1/scale

# Error-rate analysis
KUMMER_TERM_BUDGET = 4000  # 1F1 at large negative arguments sums terms of size e^|z|

# Asymptotic success probability premises
ASYMPTOTIC_NOISE_RATIO = 1e-3  # sigma^2 / rho at most
ASYMPTOTIC_OVERFLOW_MASS = 1e-6  # P{|U_in| >= J} at most

# Codebooks
NN_RTOL = 1e-9
UNIT_POWER_TOL = 1e-9
MAX_RESOURCE_BLOCKS = 16

# Network model
C_VORONOI = 3.575
PMF_TAIL_MASS = 1e-12
PMF_MAX_TERMS = 100_000

# Monte Carlo
DEFAULT_WINDOW_SIDE = 10_000.0  # metres
CI_Z = 1.96

# Reference network (linear SI units)
DEFAULT_LAMBDA_B = 1e-5
DEFAULT_P_A = 0.1
DEFAULT_RHO_DBM = -100.0
DEFAULT_SIGMA_SQ_DBM = -90.0
DEFAULT_RHO_MAX_W = 1.0
DEFAULT_ETA = 4.0
DEFAULT_K = 4
DEFAULT_L = 6
DEFAULT_T = 4
DEFAULT_M = 4
DEFAULT_D_S = 2
DEFAULT_LAMBDA_U = 6e-6
DEFAULT_GAMMA_TH_DB = -5.0

# Output
CSV_FLOAT_FORMAT = "%.10g"
SWEEP_VARIABLES = ("gamma_th_db", "lambda_u", "snr_db", "rho_max_dbm", "t_over_k")

# Environment flags
THREADS = max(1, int(os.getenv("GFSCMA_THREADS", "1") or "1"))
LOG_LEVEL = os.getenv("GFSCMA_LOG_LEVEL", "INFO").upper()
LOG_DIR = Path(os.environ["GFSCMA_LOG_DIR"]) if os.getenv("GFSCMA_LOG_DIR") else None
