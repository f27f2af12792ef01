"""
Radial Solver Configuration
===========================

Configuration defaults and constants for the critical Schrodinger-Poisson solver.

HOW TO USE:
1. Edit the CONFIG dictionary below to change the defaults
2. Environment variables (see sysconfigs/settings.py) override output dir, workers, log level
3. A JSON config file and command-line flags override everything else

CONFIGURATION OPTIONS:
- Problem parameters (R, q, lambda relative to lambda_1)
- Grid size and solver tolerances
- Instanton eps schedule and fit degree
- Sweep grids and worker count
- Output directory and formats
"""

import math

from sysconfigs.settings import get_log_level, get_output_dir, get_worker_count

CONFIG = {
    # Problem
    "R": 1.0,
    "M": 1024,
    "q": 1.0,
    "lambda_rel": 0.5,  # lambda = lambda_rel * lambda_1 unless lambda_abs is given
    "lambda_abs": None,

    # Eigen solve
    "eigen_tol": 1e-12,
    "eigen_max_iters": 500,

    # Ground state descent
    "grad_tol": 1e-9,  # Sobolev-gradient norm of the Nehari-scaled iterate
    "max_iters": 5000,
    "initial_step": 1.0,
    "step_shrink": 0.5,
    "min_step": 1e-12,
    "armijo_c1": 1e-4,
    "init": "eig",  # eig | instanton | file | random (seeded)
    "init_eps": None,  # instanton init; None means 4 * eps_min
    "init_file": None,
    "seed": 0,

    # Instanton estimates
    "eps_schedule": [1e-1, 4.6415888336127775e-2, 2.1544346900318822e-2, 1e-2,
                     4.6415888336127775e-3, 2.1544346900318822e-3, 1e-3],
    "fit_degree": 2,
    "resolution_nodes": 10,  # eps_min = (resolution_nodes * h)^2
    "sobolev_descent_iters": 4000,
    "sobolev_grad_tol": 1e-6,  # S_disc descent; the quotient error is quadratic in this

    # Nonexistence probe
    "probe_schedule": [256, 512, 1024, 2048],
    "probe_max_iters": 400,
    "concentration_fraction": 0.5,

    # Sweeps
    "sweep_lambda_rel": [0.4, 0.6, 0.8],
    "sweep_q": [1.0],
    "workers": get_worker_count(1),
    "retry_attempts": 2,

    # Diagnostics
    "continuum_essi": False,
    "refinement_levels": 3,  # Pohozaev refinement table: M/4, M/2, M
    "level_check_tol": 1e-8,

    # Output
    "out_dir": get_output_dir("spsolve_out"),
    "formats": ["csv", "md"],
    "log_level": get_log_level("INFO"),
}

# Surface area of the unit sphere in R^3
OMEGA = 4.0 * math.pi

# Reference values the measured constants are compared against
SOBOLEV_S_ORACLE = 3.0 * (math.pi / 2.0) ** (4.0 / 3.0)
INSTANTON_K_ORACLE = (math.pi ** 2 / 4.0) ** (1.0 / 3.0)

SUPPORTED_EXPONENTS = (2, 5, 6)
MIN_INTERIOR_NODES = 16

COMMANDS = ("eigen", "ground", "instanton", "probe", "sweep")
INIT_CHOICES = ("eig", "instanton", "file", "random")

SWEEP_COLUMNS = [
    "lambda_over_lambda1", "q", "R", "M", "c", "threshold", "below_threshold",
    "pde_residual", "pohozaev_residual", "concentration_radius", "converged",
    "iterations", "wall_time", "code_version", "config_hash", "note",
]

INSTANTON_COLUMNS = [
    "eps", "grad_sq", "l6_sq", "l2_sq", "t_eps", "supJ", "supJ_formula",
    "threshold", "A_phi", "S_est", "K_est",
]

SOLUTION_COLUMNS = ["r", "u", "phi"]
