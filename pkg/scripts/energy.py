"""
Energy Functionals
==================

The two-variable functional F, the reduced functional I(u) = F(u, phi_u), the
auxiliary functional J, the gradient of I and the fibering/Nehari algebra.

FUNCTIONS:
- energy_F, energy_I, energy_J
- grad_I (L^2 representation) and sobolev_gradient (inverse discrete Laplacian)
- fiber_tstar: the positive maximum of t -> I(tu) = t^2/2 (a - lambda b) - t^10 q n/10
- nehari_quotient W(u) = (2/5)(a - lambda b)^(5/4) / (q n)^(1/4), 0-homogeneous
- fiber_tstar_J: the positive maximum of t -> J(tu)

NOTES:
The mountain-pass level is computed as inf W. For fibering maps alpha t^2 - beta t^10
with alpha, beta > 0 the mountain-pass and Nehari levels coincide; this is an
assumption of the reported level, not something the code certifies.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from scripts.poisson_reduction import ReducedPotential, solve_phi
from scripts.radial_core import (
    PhysParams, RadialField, apply_neg_laplacian, check_same_grid, dirichlet_energy, inner,
    lp_mass, solve_neg_laplacian,
)
from scripts.solver_errors import DegenerateFieldError, NoFiberMaxError

logger = logging.getLogger(__name__)

LEVEL_ASSUMPTION = ("mountain-pass level reported as the Nehari level inf W "
                    "(fibering maps alpha*t^2 - beta*t^10, alpha, beta > 0)")


@dataclass(frozen=True)
class EnergyBreakdown:
    a: float  # ||grad u||^2
    b: float  # ||u||^2
    n: float  # N(u) = int |u|^5 phi_u
    sixth: float  # int |u|^6
    i_val: float
    j_val: float


@dataclass(frozen=True)
class FiberInfo:
    t_star: float
    level: float
    nehari_pairing: float  # <I'(u), u> = a - lambda b - q n


def _fifth_power(u: RadialField) -> RadialField:
    return RadialField(u.grid, np.abs(u.values) ** 5)


def _breakdown(u: RadialField, params: PhysParams, reduced: ReducedPotential) -> EnergyBreakdown:
    a = dirichlet_energy(u)
    b = lp_mass(u, 2)
    sixth = lp_mass(u, 6)
    n = reduced.coupling_n
    lam, q = params.lam, params.q
    return EnergyBreakdown(
        a=a, b=b, n=n, sixth=sixth,
        i_val=0.5 * a - 0.5 * lam * b - 0.1 * q * n,
        j_val=0.6 * a - 0.5 * lam * b - 0.2 * q * sixth,
    )


def evaluate(u: RadialField, params: PhysParams) -> Tuple[EnergyBreakdown, ReducedPotential]:
    reduced = solve_phi(u, params)
    return _breakdown(u, params, reduced), reduced


def energy_F(u: RadialField, phi: RadialField, params: PhysParams) -> float:
    """F(u, phi) = a/2 - lambda b/2 - (q/5) int |u|^5 phi + (1/10) ||grad phi||^2"""
    check_same_grid(u, phi)
    coupling = inner(_fifth_power(u), phi)
    return (0.5 * dirichlet_energy(u) - 0.5 * params.lam * lp_mass(u, 2)
            - 0.2 * params.q * coupling + 0.1 * dirichlet_energy(phi))


def energy_I(u: RadialField, params: PhysParams) -> EnergyBreakdown:
    breakdown, _ = evaluate(u, params)
    return breakdown


def energy_J(u: RadialField, params: PhysParams) -> float:
    """J(u) = (3/5) a - (lambda/2) b - (q/5) int |u|^6"""
    return 0.6 * dirichlet_energy(u) - 0.5 * params.lam * lp_mass(u, 2) - 0.2 * params.q * lp_mass(u, 6)


def _coupling_force(u: RadialField, phi: RadialField) -> np.ndarray:
    """phi |u|^3 u, nodewise"""
    return phi.values * np.abs(u.values) ** 3 * u.values


def grad_I(u: RadialField, params: PhysParams, phi: Optional[RadialField] = None) -> RadialField:
    """g = -Delta u - lambda u - q phi_u |u|^3 u, so that <g, v> = I'(u) v"""
    if phi is None:
        phi = solve_phi(u, params).phi
    laplacian = apply_neg_laplacian(u)
    values = laplacian.values - params.lam * u.values - params.q * _coupling_force(u, phi)
    return u.with_values(values)


def sobolev_gradient(g: RadialField) -> RadialField:
    """H^1_0 representative: solve -Delta g_hat = g"""
    return solve_neg_laplacian(g)


def sobolev_norm(g: RadialField, g_hat: RadialField) -> float:
    """||g_hat||_{H^1_0} = sqrt(<g, g_hat>)"""
    return math.sqrt(max(inner(g, g_hat), 0.0))


def _fiber_inputs(breakdown: EnergyBreakdown, params: PhysParams) -> Tuple[float, float]:
    alpha = breakdown.a - params.lam * breakdown.b
    beta = params.q * breakdown.n
    if beta <= 0.0:
        raise DegenerateFieldError("N(u) = 0: the zero field has no fibering maximum")
    if alpha <= 0.0:
        raise NoFiberMaxError(alpha)
    return alpha, beta


def fiber_from_breakdown(breakdown: EnergyBreakdown, params: PhysParams) -> FiberInfo:
    alpha, beta = _fiber_inputs(breakdown, params)
    return FiberInfo(
        t_star=(alpha / beta) ** 0.125,
        level=0.4 * alpha ** 1.25 / beta ** 0.25,
        nehari_pairing=alpha - beta,
    )


def fiber_tstar(u: RadialField, params: PhysParams) -> FiberInfo:
    """Unique positive maximum of t -> I(tu): t_star^8 = (a - lambda b)/(q n)"""
    return fiber_from_breakdown(energy_I(u, params), params)


def nehari_quotient(u: RadialField, params: PhysParams) -> float:
    """W(u) = (2/5)(a - lambda b)^(5/4)/(q n)^(1/4) = sup_t I(tu)"""
    return fiber_tstar(u, params).level


def nehari_projection(u: RadialField, params: PhysParams) -> RadialField:
    return u * fiber_tstar(u, params).t_star


def nehari_quotient_with_gradient(u: RadialField, params: PhysParams) -> Tuple[float, RadialField]:
    """W(u) and its L^2 gradient (alpha/beta)^(1/4) (-Delta u - lambda u - (alpha/beta) q phi |u|^3 u)"""
    breakdown, reduced = evaluate(u, params)
    alpha, beta = _fiber_inputs(breakdown, params)
    ratio = alpha / beta
    laplacian = apply_neg_laplacian(u)
    values = (laplacian.values - params.lam * u.values
              - ratio * params.q * _coupling_force(u, reduced.phi))
    return 0.4 * alpha ** 1.25 / beta ** 0.25, u.with_values(ratio ** 0.25 * values)


def fiber_tstar_J(breakdown: EnergyBreakdown, params: PhysParams) -> Tuple[float, float]:
    """(t, J(tu)) at the positive maximum of t -> t^2 ((3/5) a - (lambda/2) b) - t^6 (q/5) int |u|^6"""
    radicand = 1.2 * breakdown.a - params.lam * breakdown.b
    if breakdown.sixth <= 0.0:
        raise DegenerateFieldError("int |u|^6 = 0: the zero field has no fibering maximum")
    if radicand <= 0.0:
        raise NoFiberMaxError(radicand, f"no maximum of t -> J(tu): (6/5) a - lambda b = {radicand:.6e} <= 0")
    t = (radicand / (1.2 * params.q * breakdown.sixth)) ** 0.25
    x = 0.5 * radicand
    return t, t ** 2 * x - 0.2 * params.q * t ** 6 * breakdown.sixth


def fiber_derivative_J(breakdown: EnergyBreakdown, params: PhysParams, t: float) -> float:
    """d/dt J(tu)"""
    return 2.0 * t * (0.6 * breakdown.a - 0.5 * params.lam * breakdown.b) - 1.2 * params.q * t ** 5 * breakdown.sixth


def compactness_threshold(sobolev_constant: float, q: float) -> float:
    """(2/5) sqrt(S^3/q): below this level Palais-Smale sequences stay compact"""
    return 0.4 * math.sqrt(sobolev_constant ** 3 / q)
