"""
Poisson Reduction
=================

The reduction map u -> phi_u: solve -Delta phi = q|u|^5 in B_R with phi = 0 on
the boundary, using the same discrete operator as the u-equation.

Because both equations share one operator and one pairing, the identities
||grad phi_u||^2 = q * int |u|^5 phi_u and the symmetry of the discrete Green
operator hold to round-off, not just to O(h^2).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from scripts.radial_core import (
    PhysParams, RadialField, check_same_grid, dirichlet_energy, inner, solve_neg_laplacian,
)
from scripts.solver_errors import ConfigurationError, DegenerateFieldError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedPotential:
    phi: RadialField
    coupling_n: float  # N(u) = int |u|^5 phi_u
    dirichlet_phi: float  # ||grad phi_u||^2


def source_term(u: RadialField, params: PhysParams) -> RadialField:
    return RadialField(u.grid, params.q * np.abs(u.values) ** 5)


def solve_phi(u: RadialField, params: PhysParams) -> ReducedPotential:
    """phi_u from the SPD tridiagonal system; phi_u >= 0 since the matrix is an M-matrix"""
    phi = solve_neg_laplacian(source_term(u, params))
    fifth = RadialField(u.grid, np.abs(u.values) ** 5)
    return ReducedPotential(
        phi=phi,
        coupling_n=inner(fifth, phi),
        dirichlet_phi=dirichlet_energy(phi),
    )


def green_symmetry_defect(u: RadialField, w: RadialField, params: PhysParams) -> float:
    """|int |u|^5 phi_w - int |w|^5 phi_u|"""
    check_same_grid(u, w)
    phi_u = solve_phi(u, params).phi
    phi_w = solve_phi(w, params).phi
    fifth_u = RadialField(u.grid, np.abs(u.values) ** 5)
    fifth_w = RadialField(w.grid, np.abs(w.values) ** 5)
    return abs(inner(fifth_u, phi_w) - inner(fifth_w, phi_u))


def essi_bound_terms(u: RadialField, params: PhysParams, sobolev_constant: float):
    """(q/S^3) ||grad u||^5 and ||grad phi_u||"""
    if u.is_zero():
        raise DegenerateFieldError("the bound on ||grad phi_u|| is vacuous for u = 0")
    if not sobolev_constant > 0:
        raise ConfigurationError(f"Sobolev constant must be positive, got {sobolev_constant!r}",
                                 field="S_disc")
    grad_u = math.sqrt(dirichlet_energy(u))
    bound = params.q / sobolev_constant ** 3 * grad_u ** 5
    return bound, math.sqrt(solve_phi(u, params).dirichlet_phi)


def essi_gap(u: RadialField, params: PhysParams, S_disc: float) -> float:
    """(q/S_disc^3) ||grad u||^5 - ||grad phi_u||, nonnegative for a valid discrete constant"""
    bound, grad_phi = essi_bound_terms(u, params, S_disc)
    return bound - grad_phi
