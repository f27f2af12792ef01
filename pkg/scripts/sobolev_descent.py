"""
Sobolev Gradient Descent
========================

Armijo-backtracked descent for 0-homogeneous quotients on radial fields,
preconditioned by the inverse discrete Laplacian (the H^1_0 gradient), with a
positivity projection u -> |u| and a normalization applied after every step.
The origin value is rebuilt from the interior after every step, since no
objective weights it.

Used by the ground-state solver (quotient W, Nehari normalization) and by the
discrete Sobolev constant estimate (quotient ||grad v||^2 / ||v||_6^2).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from scripts.energy import sobolev_gradient, sobolev_norm
from scripts.radial_core import RadialField
from scripts.solver_config import CONFIG
from scripts.solver_errors import SolverError

logger = logging.getLogger(__name__)

Objective = Callable[[RadialField], Tuple[float, RadialField]]
Normalizer = Callable[[RadialField], RadialField]


@dataclass(frozen=True)
class DescentSettings:
    max_iters: int = CONFIG["max_iters"]
    grad_tol: float = CONFIG["grad_tol"]
    initial_step: float = CONFIG["initial_step"]
    shrink: float = CONFIG["step_shrink"]
    min_step: float = CONFIG["min_step"]
    armijo_c1: float = CONFIG["armijo_c1"]


@dataclass
class DescentResult:
    u: RadialField
    value: float
    gradient: RadialField  # L^2 gradient at u
    gradient_norm: float  # Sobolev norm at u
    iterations: int
    converged: bool
    stalled: bool = False
    history: List[float] = field(default_factory=list)
    steps: List[float] = field(default_factory=list)


def _roundoff_slack(value: float) -> float:
    # W decrements fall below double precision near convergence
    return 256.0 * np.finfo(float).eps * (abs(value) + 1.0)


def sobolev_descent(objective: Objective, u0: RadialField, normalize: Normalizer,
                    settings: DescentSettings = DescentSettings(), label: str = "descent") -> DescentResult:
    """Minimize objective from u0.

    Every trial point is |u - s*g_hat| with a smooth origin, followed by
    normalize(); a trial that leaves the admissible set (normalize or
    objective raising SolverError) is treated as a rejected step. Convergence
    is declared on the Sobolev norm of the gradient at the normalized iterate.
    """
    u = normalize(abs(u0).with_smooth_origin())
    value, gradient = objective(u)
    g_hat = sobolev_gradient(gradient)
    g_norm = sobolev_norm(gradient, g_hat)
    history = [value]
    steps: List[float] = []
    converged = g_norm <= settings.grad_tol
    stalled = False
    iteration = 0

    while not converged and iteration < settings.max_iters:
        iteration += 1
        step = settings.initial_step
        accepted = None
        while step >= settings.min_step:
            try:
                trial = normalize(abs(u - g_hat * step).with_smooth_origin())
                trial_value, trial_gradient = objective(trial)
            except SolverError as e:
                logger.debug(f"{label}: step {step:.3e} rejected ({e})")
                step *= settings.shrink
                continue
            decrease = settings.armijo_c1 * step * g_norm ** 2
            if trial_value <= value - decrease + _roundoff_slack(value):
                accepted = (trial, trial_value, trial_gradient)
                break
            step *= settings.shrink

        if accepted is None:
            stalled = True
            logger.warning(f"{label}: line search stalled at iteration {iteration} "
                           f"(value {value:.12g}, gradient norm {g_norm:.3e})")
            break

        u, value, gradient = accepted
        g_hat = sobolev_gradient(gradient)
        g_norm = sobolev_norm(gradient, g_hat)
        history.append(value)
        steps.append(step)
        converged = g_norm <= settings.grad_tol
        if iteration % 100 == 0:
            logger.debug(f"{label}: iteration {iteration}, value {value:.14g}, gradient norm {g_norm:.3e}")

    logger.info(f"{label}: {'converged' if converged else 'stopped'} after {iteration} iterations, "
                f"value {value:.12g}, gradient norm {g_norm:.3e}")
    return DescentResult(u=u, value=value, gradient=gradient, gradient_norm=g_norm,
                         iterations=iteration, converged=converged, stalled=stalled,
                         history=history, steps=steps)
