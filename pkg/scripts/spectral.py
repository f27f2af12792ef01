"""
Spectral
========

Principal Dirichlet eigenpair (lambda_1, e_1) of -Delta on B_R and the
existence window (0.3*lambda_1, lambda_1).

HOW TO USE:
    eigen = principal_eigenpair(build_grid(1.0, 2048), tol=1e-12)
    low, high = lambda_window(eigen)
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from scripts.radial_core import RadialField, RadialGrid, dirichlet_energy, lp_mass
from scripts.solver_config import CONFIG
from scripts.solver_errors import ConfigurationError, ConvergenceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EigenPair:
    lambda1: float
    e1: RadialField
    iterations: int = 0

    @property
    def grid(self) -> RadialGrid:
        return self.e1.grid

    def rayleigh_quotient(self) -> float:
        return dirichlet_energy(self.e1) / lp_mass(self.e1, 2)


def _rayleigh(grid: RadialGrid, v: np.ndarray) -> float:
    """sum (v_i - v_{i-1})^2 / (h^2 sum v_i^2) with v_0 = v_M = 0"""
    padded = np.concatenate(([0.0], v, [0.0]))
    return float(np.sum(np.diff(padded) ** 2) / (grid.h ** 2 * np.dot(v, v)))


def _eigen_residual(grid: RadialGrid, v: np.ndarray, mu: float) -> float:
    """|T v / h^2 - mu v| / mu for unit v"""
    padded = np.concatenate(([0.0], v, [0.0]))
    tv = (2.0 * v - padded[:-2] - padded[2:]) / grid.h ** 2
    return float(np.linalg.norm(tv - mu * v) / mu)


def principal_eigenpair(grid: RadialGrid, tol: float = CONFIG["eigen_tol"],
                        max_iters: int = CONFIG["eigen_max_iters"]) -> EigenPair:
    """Inverse power iteration on the v = r*u tridiagonal operator.

    Stops when the relative change of the Rayleigh quotient drops below tol and
    the eigen-equation residual has reached its round-off floor.
    The returned e_1 is positive at the first interior node and has unit L^2 mass.
    """
    if not tol > 0:
        raise ConfigurationError(f"tolerance must be positive, got {tol!r}", field="tol")
    if max_iters < 1:
        raise ConfigurationError(f"need at least one iteration, got {max_iters!r}", field="max_iters")

    # The Rayleigh quotient carries round-off of relative size about eps * M
    eps = np.finfo(float).eps
    threshold = max(tol, 64.0 * eps * grid.M)
    inside = grid.interior
    # Generic start with the right sign, not the discrete eigenvector itself
    v = grid.r[inside] * (grid.R - grid.r[inside]) * (1.0 + grid.r[inside] / grid.R)
    v /= np.linalg.norm(v)
    mu = _rayleigh(grid, v)

    for iteration in range(1, max_iters + 1):
        v = scipy.linalg.cho_solve_banded((grid.laplacian_factor, False), v)
        v /= np.linalg.norm(v)
        mu_next = _rayleigh(grid, v)
        change = abs(mu_next - mu) / abs(mu_next)
        mu = mu_next
        residual = _eigen_residual(grid, v, mu)
        if change < threshold and residual < max(tol, 32.0 * eps * 4.0 / (grid.h ** 2 * mu)):
            break
    else:
        raise ConvergenceError(
            f"inverse iteration did not reach tol={tol:.1e} in {max_iters} steps",
            last_iterate=v,
            diagnostics={"lambda1": mu, "relative_change": change, "residual": residual},
        )

    if v[0] < 0:
        v = -v
    values = np.zeros(grid.M + 1)
    values[inside] = v / grid.r[inside]
    # Origin value from the same stencil: 6(e_0 - e_1)/h^2 = lambda_1 e_0
    values[0] = values[1] / (1.0 - mu * grid.h ** 2 / 6.0)
    e1 = RadialField(grid, values)
    e1 = e1 * (1.0 / np.sqrt(lp_mass(e1, 2)))

    logger.info(f"Principal eigenpair: lambda_1 = {mu:.12g} (R={grid.R}, M={grid.M}, {iteration} iterations)")
    return EigenPair(lambda1=mu, e1=e1, iterations=iteration)


def lambda_window(eigen: EigenPair) -> Tuple[float, float]:
    """Open existence window (3/10 lambda_1, lambda_1)"""
    return 0.3 * eigen.lambda1, eigen.lambda1


def continuum_lambda1(R: float) -> float:
    return (np.pi / R) ** 2
