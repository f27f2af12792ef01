"""
Instanton Estimates
===================

The concentrating test family u_eps(r) = phi(r) / (eps + r^2)^(1/2), its norm
asymptotics, the measured constants S and K, the coefficient A(phi), the
fibering maximum t_eps of J and the sup J estimate behind c < (2/5) sqrt(S^3/q).

HOW TO USE:
This module is imported by the runner and the ground-state solver.

FUNCTIONS:
- default_cutoff / cutoff_integrals: the cos(pi r / 2R) cutoff and its 1-D integrals
- instanton_field / instanton_norms: u_eps on the grid and ||grad u||^2, ||u||_6^2, ||u||_2^2
- estimate_S_and_K: extrapolated S and K plus the discrete Sobolev infimum S_disc
- A_of_cutoff / lambda_root_of_A: the sign that decides the strict level inequality
- t_eps_value / maximize_J_fiber / supJ_estimate: sup_t J(t u_eps), closed form and direct

NOTES:
eps must be at least (10 h)^2 so the bubble core spans ten nodes; the S_disc
search evaluates bubbles below that guard on purpose.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.optimize
from numpy.polynomial import polynomial

from scripts.energy import (
    compactness_threshold, energy_I, energy_J, fiber_tstar_J, sobolev_gradient,
)
from scripts.radial_core import (
    PhysParams, RadialField, RadialGrid, apply_neg_laplacian, build_grid, dirichlet_energy, lp_mass,
)
from scripts.sobolev_descent import DescentSettings, sobolev_descent
from scripts.solver_config import CONFIG, INSTANTON_K_ORACLE, OMEGA, SOBOLEV_S_ORACLE
from scripts.solver_errors import ConfigurationError, ResolutionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cutoff:
    """Radial cutoff with phi(0) = 1, phi'(0) = 0, phi(R) = 0"""

    name: str
    R: float
    value: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    derivative: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __post_init__(self):
        at_zero = float(self.value(np.array(0.0)))
        slope_zero = float(self.derivative(np.array(0.0)))
        at_edge = float(self.value(np.array(self.R)))
        if abs(at_zero - 1.0) > 1e-12 or abs(slope_zero) > 1e-12 or abs(at_edge) > 1e-12:
            raise ConfigurationError(
                f"cutoff '{self.name}' is not admissible: phi(0)={at_zero}, phi'(0)={slope_zero}, "
                f"phi(R)={at_edge}", field="cutoff")


def default_cutoff(R: float) -> Cutoff:
    """phi(r) = cos(pi r / 2R)"""
    k = math.pi / (2.0 * R)
    return Cutoff(
        name=f"cos(pi r/{2.0 * R:g})",
        R=float(R),
        value=lambda r: np.cos(k * r),
        derivative=lambda r: -k * np.sin(k * r),
    )


def cutoff_integrals(cutoff: Cutoff) -> Tuple[float, float]:
    """(int_0^R phi'^2 dr, int_0^R phi^2 dr) by adaptive quadrature"""
    grad_sq, _ = scipy.integrate.quad(lambda r: float(cutoff.derivative(r)) ** 2, 0.0, cutoff.R,
                                      epsabs=1e-14, epsrel=1e-13)
    mass_sq, _ = scipy.integrate.quad(lambda r: float(cutoff.value(r)) ** 2, 0.0, cutoff.R,
                                      epsabs=1e-14, epsrel=1e-13)
    return grad_sq, mass_sq


def eps_min(grid: RadialGrid) -> float:
    """Smallest eps whose core width sqrt(eps) spans the configured number of nodes"""
    return (CONFIG["resolution_nodes"] * grid.h) ** 2


def _bubble(eps: float, cutoff: Cutoff, grid: RadialGrid) -> RadialField:
    values = cutoff.value(np.asarray(grid.r)) / np.sqrt(eps + grid.r ** 2)
    values[-1] = 0.0
    return RadialField(grid, values)


def instanton_field(eps: float, cutoff: Cutoff, grid: RadialGrid) -> RadialField:
    """Nodal u_eps; raises ResolutionError below eps_min(grid)"""
    minimum = eps_min(grid)
    if not eps >= minimum:
        raise ResolutionError(eps, minimum)
    return _bubble(eps, cutoff, grid)


@dataclass
class InstantonReport:
    eps: float
    grad_sq: float
    l6_sq: float
    l2_sq: float
    S_est: float
    K_est: float
    grad_residual: float  # grad_sq - S K / sqrt(eps)
    l6_residual: float  # l6_sq - K / sqrt(eps)
    t_eps: Optional[float] = None
    supJ: Optional[float] = None
    supJ_formula: Optional[float] = None
    threshold: Optional[float] = None
    A_phi: Optional[float] = None


def instanton_norms(eps: float, cutoff: Cutoff, grid: RadialGrid, params: PhysParams,
                    S_est: float = SOBOLEV_S_ORACLE, K_est: float = INSTANTON_K_ORACLE) -> InstantonReport:
    """The three norms of u_eps and their residuals against S K / sqrt(eps) and K / sqrt(eps)"""
    u = instanton_field(eps, cutoff, grid)
    grad_sq = dirichlet_energy(u)
    l6_sq = lp_mass(u, 6) ** (1.0 / 3.0)
    root = math.sqrt(eps)
    return InstantonReport(
        eps=eps,
        grad_sq=grad_sq,
        l6_sq=l6_sq,
        l2_sq=lp_mass(u, 2),
        S_est=S_est,
        K_est=K_est,
        grad_residual=grad_sq - S_est * K_est / root,
        l6_residual=l6_sq - K_est / root,
    )


def fit_intercept(x: np.ndarray, y: np.ndarray, degree: int) -> Tuple[float, float]:
    """Least-squares polynomial in x; returns (value at x = 0, max relative fit residual)"""
    coefficients = polynomial.polyfit(x, y, degree)
    fitted = polynomial.polyval(x, coefficients)
    residual = float(np.max(np.abs(fitted - y) / np.abs(y)))
    return float(coefficients[0]), residual


@dataclass
class SobolevEstimate:
    S_est: float
    K_est: float
    S_disc: Optional[float]
    SK_intercept: float
    fit_residual_S: float
    fit_residual_K: float
    fit_degree: int
    reports: List[InstantonReport] = field(default_factory=list)

    @property
    def S_deviation(self) -> float:
        return self.S_est / SOBOLEV_S_ORACLE - 1.0

    @property
    def K_deviation(self) -> float:
        return self.K_est / INSTANTON_K_ORACLE - 1.0


def _check_schedule(eps_schedule: Sequence[float], grid: RadialGrid) -> np.ndarray:
    schedule = np.asarray(eps_schedule, dtype=float)
    if schedule.size < 3:
        raise ConfigurationError(f"need at least 3 eps values, got {schedule.size}", field="eps_schedule")
    if np.any(np.diff(schedule) >= 0):
        raise ConfigurationError("eps schedule must be strictly decreasing", field="eps_schedule")
    minimum = eps_min(grid)
    if schedule[-1] < minimum:
        raise ResolutionError(float(schedule[-1]), minimum)
    return schedule


def estimate_S_and_K(eps_schedule: Sequence[float], cutoff: Cutoff, grid: RadialGrid, params: PhysParams,
                     fit_degree: int = CONFIG["fit_degree"], with_discrete: bool = True) -> SobolevEstimate:
    """K from sqrt(eps) ||u_eps||_6^2 and S from grad_sq / l6_sq, both extrapolated to eps = 0 in sqrt(eps)"""
    schedule = _check_schedule(eps_schedule, grid)
    if not 1 <= fit_degree < schedule.size:
        raise ConfigurationError(f"fit degree {fit_degree} needs more than {fit_degree} points",
                                 field="fit_degree")
    reports = [instanton_norms(float(eps), cutoff, grid, params) for eps in schedule]
    root = np.sqrt(schedule)
    grad_sq = np.array([report.grad_sq for report in reports])
    l6_sq = np.array([report.l6_sq for report in reports])

    K_est, residual_K = fit_intercept(root, root * l6_sq, fit_degree)
    S_est, residual_S = fit_intercept(root, grad_sq / l6_sq, fit_degree)
    SK_intercept, _ = fit_intercept(root, root * grad_sq, fit_degree)
    for report in reports:
        report.S_est, report.K_est = S_est, K_est
        report.grad_residual = report.grad_sq - S_est * K_est / math.sqrt(report.eps)
        report.l6_residual = report.l6_sq - K_est / math.sqrt(report.eps)

    S_disc = discrete_sobolev_constant(grid) if with_discrete else None
    logger.info(f"Sobolev estimate: S_est = {S_est:.6f} (oracle {SOBOLEV_S_ORACLE:.6f}), "
                f"K_est = {K_est:.6f} (oracle {INSTANTON_K_ORACLE:.6f}), S_disc = {S_disc}")
    return SobolevEstimate(S_est=S_est, K_est=K_est, S_disc=S_disc, SK_intercept=SK_intercept,
                           fit_residual_S=residual_S, fit_residual_K=residual_K,
                           fit_degree=fit_degree, reports=reports)


def sobolev_quotient(u: RadialField) -> float:
    """||grad u||^2 / ||u||_6^2"""
    return dirichlet_energy(u) / lp_mass(u, 6) ** (1.0 / 3.0)


def _sobolev_quotient_with_gradient(u: RadialField) -> Tuple[float, RadialField]:
    a = dirichlet_energy(u)
    sixth = lp_mass(u, 6)
    scale = sixth ** (-1.0 / 3.0)
    values = 2.0 * scale * (apply_neg_laplacian(u).values - (a / sixth) * np.abs(u.values) ** 4 * u.values)
    return a * scale, u.with_values(values)


def _unit_sixth(u: RadialField) -> RadialField:
    return u * lp_mass(u, 6) ** (-1.0 / 6.0)


@dataclass(frozen=True)
class DiscreteSobolev:
    """Outcome of the descent on ||grad v||^2 / ||v||_6^2 for one grid"""

    value: float
    u: RadialField = field(repr=False)  # minimizer, ||u||_6 = 1
    gradient_norm: float
    iterations: int
    converged: bool
    start_eps: float


@lru_cache(maxsize=32)
def _discrete_sobolev(R: float, M: int, max_iters: int, grad_tol: float) -> DiscreteSobolev:
    grid = build_grid(R, M)
    cutoff = default_cutoff(R)
    candidates = np.logspace(math.log10(grid.h ** 2), math.log10(R ** 2), 48)
    quotients = [sobolev_quotient(_bubble(float(eps), cutoff, grid)) for eps in candidates]
    best = int(np.argmin(quotients))
    start = _bubble(float(candidates[best]), cutoff, grid)
    settings = DescentSettings(max_iters=max_iters, grad_tol=grad_tol)
    result = sobolev_descent(_sobolev_quotient_with_gradient, start, _unit_sixth, settings,
                             label=f"discrete Sobolev quotient (M={M})")
    if not result.converged:
        logger.warning(f"S_disc(M={M}): descent stopped after {result.iterations} iterations with gradient "
                       f"norm {result.gradient_norm:.3e} > {grad_tol:.1e}; the value is an upper bound")
    logger.info(f"S_disc(M={M}) = {result.value:.10f} from bubble eps = {candidates[best]:.3e} "
                f"(quotient {quotients[best]:.10f})")
    return DiscreteSobolev(value=result.value, u=result.u, gradient_norm=result.gradient_norm,
                           iterations=result.iterations, converged=result.converged,
                           start_eps=float(candidates[best]))


def discrete_sobolev_estimate(grid: RadialGrid, max_iters: int = CONFIG["sobolev_descent_iters"],
                              grad_tol: float = CONFIG["sobolev_grad_tol"]) -> DiscreteSobolev:
    """inf ||grad v||^2 / ||v||_6^2 over grid functions, searched from the best truncated bubble.

    The quotient is dilation invariant, so the value depends on M only; it is
    cached per (R, M).
    """
    return _discrete_sobolev(grid.R, grid.M, max_iters, grad_tol)


def discrete_sobolev_constant(grid: RadialGrid, max_iters: int = CONFIG["sobolev_descent_iters"]) -> float:
    return discrete_sobolev_estimate(grid, max_iters).value


def A_of_cutoff(cutoff: Cutoff, params: PhysParams, K_est: float) -> float:
    """A(phi) = omega/(q K) int_0^R (phi'^2 - (5/6) lambda phi^2) dr"""
    if not K_est > 0:
        raise ConfigurationError(f"K must be positive, got {K_est!r}", field="K_est")
    grad_sq, mass_sq = cutoff_integrals(cutoff)
    return OMEGA / (params.q * K_est) * (grad_sq - 5.0 / 6.0 * params.lam * mass_sq)


def lambda_root_of_A(cutoff: Cutoff, params: PhysParams, K_est: float, lambda_high: float,
                     xtol: float = 1e-12) -> float:
    """lambda where A(phi) changes sign, by bisection on [0, lambda_high]"""
    def signed(lam: float) -> float:
        return A_of_cutoff(cutoff, params.with_lambda(lam), K_est)

    if signed(0.0) * signed(lambda_high) > 0:
        raise ConfigurationError(f"A(phi) does not change sign on [0, {lambda_high}]", field="lambda_high")
    return float(scipy.optimize.bisect(signed, 0.0, lambda_high, xtol=xtol))


def t_eps_value(eps: float, cutoff: Cutoff, params: PhysParams, grid: RadialGrid) -> float:
    """t_eps = (1/||u||_6) ((6/5 a - lambda b) / (6/5 q ||u||_6^2))^(1/4)"""
    t, _ = fiber_tstar_J(energy_I(instanton_field(eps, cutoff, grid), params), params)
    return t


def maximize_J_fiber(u: RadialField, params: PhysParams) -> Tuple[float, float]:
    """Direct 1-D maximization of t -> J(tu); returns (t, J(tu))"""
    t_closed, _ = fiber_tstar_J(energy_I(u, params), params)
    result = scipy.optimize.minimize_scalar(
        lambda t: -energy_J(u * t, params),
        bounds=(0.0, 3.0 * t_closed), method="bounded",
        options={"xatol": 1e-12 * t_closed, "maxiter": 500},
    )
    return float(result.x), float(-result.fun)


@dataclass(frozen=True)
class SupJEstimate:
    direct: float  # J(t_eps u_eps)
    formula: float  # (2/5) q ((S/q + A sqrt(eps))^3)^(1/2)
    threshold: float  # (2/5) sqrt(S^3/q)
    t_eps: float
    A_phi: float

    @property
    def below_threshold(self) -> bool:
        return self.direct < self.threshold


def supJ_estimate(eps: float, cutoff: Cutoff, params: PhysParams, grid: RadialGrid,
                  S_est: float, K_est: float) -> SupJEstimate:
    u = instanton_field(eps, cutoff, grid)
    t, direct = fiber_tstar_J(energy_I(u, params), params)
    A = A_of_cutoff(cutoff, params, K_est)
    inside = S_est / params.q + A * math.sqrt(eps)
    formula = 0.4 * params.q * math.sqrt(max(inside, 0.0) ** 3)
    return SupJEstimate(direct=direct, formula=formula,
                        threshold=compactness_threshold(S_est, params.q), t_eps=t, A_phi=A)


def instanton_report(eps: float, cutoff: Cutoff, params: PhysParams, grid: RadialGrid,
                     S_est: float, K_est: float) -> InstantonReport:
    """instanton_norms plus t_eps, sup J and A(phi) for one schedule point"""
    report = instanton_norms(eps, cutoff, grid, params, S_est, K_est)
    estimate = supJ_estimate(eps, cutoff, params, grid, S_est, K_est)
    report.t_eps = estimate.t_eps
    report.supJ = estimate.direct
    report.supJ_formula = estimate.formula
    report.threshold = estimate.threshold
    report.A_phi = estimate.A_phi
    return report
