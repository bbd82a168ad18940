"""Constants for the reeftip package."""

from __future__ import annotations

DOMAIN = "reeftip"
JOBS_ENV_VAR = "REEFTIP_JOBS"  # Default for --jobs when set

# Model defaults
DEFAULT_D = 0.22  # Minimum per-capita feeding rate
DEFAULT_EPSILON = 0.01  # Timescale ratio rC/rA
DEFAULT_DELTA = 0.01  # Ramp margin away from d and alpha_max
MAX_RAMP_RATE = 0.1  # Largest ramp rate accepted by the folded analysis
EPSILON_SOFT_MAX = 0.2  # Above this the timescale split is not meaningful

# Root finding
H_BIG = 1.0e3  # Upper end of bracketing searches in H
H_SCAN_MIN = 1.0e-9  # Lower end of log-spaced sign scans
H_SCAN_POINTS = 4000  # Points in log-spaced sign scans
ROOT_XTOL = 1.0e-14  # Absolute tolerance for scalar root brackets
ROOT_RESIDUAL_TOL = 1.0e-12  # Residual accepted for scalar roots
COINCIDENCE_TOL = 1.0e-8  # Threshold coincidence detection
MANIFOLD_RESIDUAL_TOL = 1.0e-8  # Membership test for points on S0
FOLDED_RESIDUAL_TOL = 1.0e-10  # Residual of Q and Lambda at folded singularities
DEGENERATE_DELTA_TOL = 1.0e-12  # Relative band for |Delta| near zero
HYPERBOLICITY_TOL = 1.0e-10  # Eigenvalue real parts treated as zero
RCRIT_SCAN_MIN = 1.0e-12  # Smallest ramp rate scanned for r_crit
RCRIT_SCAN_POINTS = 240  # Log-spaced points in the r_crit scan

# Integration (fast time units)
DEFAULT_RTOL = 1.0e-8
DEFAULT_ATOL = 1.0e-10
DEFAULT_MAX_STEPS = 2_000_000
EVENT_TIME_TOL = 1.0e-10  # Event location tolerance relative to the span

# Experiments
TOL_TRACK = 1.0e-3  # Max-norm distance on (H, A, C) to an attractor
TUBE_CONSTANT = 1.0  # Tube radius is TUBE_CONSTANT * sqrt(eps)
DWELL_THRESHOLD = 0.1  # Slow-time dwell separating canards from jumps
H_TIP_FLOOR = 1.0e-6  # Fish density marking collapse completion
TOL_EQUILIBRIUM = 1.0e-9  # Max-norm of the fast vector field at convergence
SETTLE_TAU = 1.0e3  # Slow-time horizon after the ramp stops
FOLD_PROXIMITY = 0.25  # Q value marking funnel entry
PROMINENCE_FACTOR = 100.0  # Peak prominence threshold as a multiple of atol
REFINE_FACTOR = 4  # Dense-output samples per accepted step
DEFAULT_LIMIT_TAU = 5.0  # Slow-time window of singular-limit checks

# Sweeps
DEFAULT_GRID = 200
DEFAULT_SIMULATE_GRID = 50
SHUTDOWN_TIMEOUT = 1.0  # Grace period when stopping sweep workers (seconds)

# Output
FLOAT_FORMAT = ".17g"  # Full double precision
TRAJECTORY_COLUMNS = ("t", "tau", "H", "A", "C", "alpha")
SWEEP_COLUMNS = ("beta", "lambda", "region", "outcome", "alpha_FS", "mu")

