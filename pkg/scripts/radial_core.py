"""
Radial Core
===========

Uniform radial mesh on [0, R], ball quadrature, the discrete radial Dirichlet
Laplacian and the norms every other module consumes.

HOW TO USE:
This module is imported by the solver modules. You don't run this file directly.

FUNCTIONS:
- build_grid: mesh, Simpson weights and the nodal pairing weights 4*pi*h*r_i^2
- integrate_ball: 4*pi * int_0^R f(r) r^2 dr by composite Simpson
- dirichlet_energy / apply_neg_laplacian: one bilinear form, written on v = r*u
- lp_mass / inner: integrals in the pairing the Laplacian is self-adjoint in
- solve_neg_laplacian: banded Cholesky solve, factorized once per grid

NOTES:
Every second-derivative stencil acts on v = r*u, so the operator is the plain
1-D Dirichlet Laplacian on v with v(0) = v(R) = 0. Summation-by-parts
<A u, u> = dirichlet_energy(u) then holds exactly.
"""

import logging
import math
import numbers
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg

from scripts.solver_config import MIN_INTERIOR_NODES, SUPPORTED_EXPONENTS
from scripts.solver_errors import (
    ConfigurationError, GridMismatchError, InvalidFieldError, UnsupportedExponentError,
)

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return values


def simpson_weights(M: int, h: float) -> np.ndarray:
    """Composite Simpson weights h/3 * [1, 4, 2, 4, ..., 4, 1] on M (even) intervals"""
    weights = np.full(M + 1, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    return weights * h / 3.0


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform mesh r_i = i*h, i = 0..M, on [0, R]"""

    R: float
    M: int
    h: float = field(init=False)
    r: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    pairing_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.R, bool) or not (isinstance(self.R, numbers.Real)
                                            and math.isfinite(self.R) and self.R > 0):
            raise ConfigurationError(f"ball radius must be positive, got {self.R!r}", field="R")
        if isinstance(self.M, bool) or not isinstance(self.M, (int, np.integer)):
            raise ConfigurationError(f"node count must be an integer, got {self.M!r}", field="M")
        if self.M < MIN_INTERIOR_NODES:
            raise ConfigurationError(f"need at least {MIN_INTERIOR_NODES} intervals, got {self.M}", field="M")
        if self.M % 2:
            raise ConfigurationError(f"Simpson weights need an even node count, got {self.M}", field="M")
        h = self.R / self.M
        r = np.arange(self.M + 1) * h
        r[-1] = self.R
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "r", _frozen(r))
        object.__setattr__(self, "weights", _frozen(simpson_weights(self.M, h)))
        # Trapezoid with r^2: both end contributions vanish (r_0 = 0, u_M = 0)
        pairing = FOUR_PI * h * r ** 2
        pairing[0] = pairing[-1] = 0.0
        object.__setattr__(self, "pairing_weights", _frozen(pairing))

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or (self.R == other.R and self.M == other.M)

    @property
    def interior(self) -> slice:
        return slice(1, self.M)

    @cached_property
    def laplacian_factor(self) -> np.ndarray:
        """Upper banded Cholesky factor of tridiag(-1, 2, -1)/h^2 on the M-1 interior v-values"""
        n = self.M - 1
        banded = np.zeros((2, n))
        banded[0, 1:] = -1.0 / self.h ** 2
        banded[1, :] = 2.0 / self.h ** 2
        return scipy.linalg.cholesky_banded(banded, lower=False)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Nodal values u_i of a radial function, Dirichlet value u_M = 0"""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.M + 1,):
            raise InvalidFieldError(f"expected {self.grid.M + 1} nodal values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidFieldError("field has non-finite values")
        if values[-1] != 0.0:
            raise InvalidFieldError(f"Dirichlet condition violated: u(R) = {values[-1]!r}")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def from_function(cls, grid: RadialGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "RadialField":
        """Sample fn at the nodes and pin the boundary node to zero"""
        values = np.array(fn(np.asarray(grid.r)), dtype=float) * np.ones(grid.M + 1)
        values[-1] = 0.0
        return cls(grid, values)

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.M + 1))

    def with_values(self, values: np.ndarray) -> "RadialField":
        values = np.array(values, dtype=float)
        values[-1] = 0.0
        return RadialField(self.grid, values)

    def with_smooth_origin(self) -> "RadialField":
        """u_0 from the even quadratic through u_1 and u_2.

        Node 0 carries no pairing weight and v_0 = 0 in every stencil, so no
        integral sees u_0; iterative solvers use this to keep it a function of
        the interior values.
        """
        values = np.array(self.values)
        values[0] = (4.0 * values[1] - values[2]) / 3.0
        return RadialField(self.grid, values)

    def is_zero(self) -> bool:
        return not np.any(self.values[:-1])

    def _check(self, other: "RadialField") -> None:
        if not self.grid.same_as(other.grid):
            raise GridMismatchError(f"fields live on different grids (R={self.grid.R}, M={self.grid.M}) "
                                    f"vs (R={other.grid.R}, M={other.grid.M})")

    def __add__(self, other: "RadialField") -> "RadialField":
        self._check(other)
        return RadialField(self.grid, self.values + other.values)

    def __sub__(self, other: "RadialField") -> "RadialField":
        self._check(other)
        return RadialField(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "RadialField":
        return RadialField(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "RadialField":
        return RadialField(self.grid, -self.values)

    def __abs__(self) -> "RadialField":
        return RadialField(self.grid, np.abs(self.values))


@dataclass(frozen=True)
class PhysParams:
    """(lambda, q, R) of the coupled problem"""

    lam: float
    q: float
    R: float

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ConfigurationError(f"lambda must be finite, got {self.lam!r}", field="lambda")
        if not (math.isfinite(self.q) and self.q > 0):
            raise ConfigurationError(f"coupling must be positive, got {self.q!r}", field="q")
        if not (math.isfinite(self.R) and self.R > 0):
            raise ConfigurationError(f"ball radius must be positive, got {self.R!r}", field="R")

    def with_lambda(self, lam: float) -> "PhysParams":
        return PhysParams(lam=lam, q=self.q, R=self.R)

    def with_q(self, q: float) -> "PhysParams":
        return PhysParams(lam=self.lam, q=q, R=self.R)


def build_grid(R: float, M: int) -> RadialGrid:
    """Build the uniform radial grid; raises ConfigurationError on bad (R, M)"""
    grid = RadialGrid(R, M)
    logger.debug(f"Built radial grid R={grid.R}, M={grid.M}, h={grid.h:.3e}")
    return grid


def check_same_grid(*fields: RadialField) -> RadialGrid:
    grid = fields[0].grid
    for other in fields[1:]:
        fields[0]._check(other)
    return grid


def integrate_ball(f: Union[RadialField, np.ndarray], grid: Optional[RadialGrid] = None) -> float:
    """4*pi * sum_i w_i f_i r_i^2 with Simpson weights.

    Accepts a RadialField or raw nodal values (then grid is required), so
    integrands without a Dirichlet zero such as f = 1 can be integrated.
    """
    if isinstance(f, RadialField):
        grid, values = f.grid, f.values
    else:
        if grid is None:
            raise ConfigurationError("raw nodal values need a grid", field="grid")
        values = np.asarray(f, dtype=float)
        if values.shape != (grid.M + 1,):
            raise InvalidFieldError(f"expected {grid.M + 1} nodal values, got shape {values.shape}")
    return float(FOUR_PI * np.dot(grid.weights, values * grid.r ** 2))


def inner(f: RadialField, g: RadialField) -> float:
    """Discrete L^2(B_R) pairing with weights 4*pi*h*r_i^2"""
    grid = check_same_grid(f, g)
    return float(np.dot(grid.pairing_weights, f.values * g.values))


def lp_mass(u: RadialField, p: int) -> float:
    """int_{B_R} |u|^p in the pairing quadrature, for p in {2, 5, 6}"""
    if p not in SUPPORTED_EXPONENTS:
        raise UnsupportedExponentError(f"exponent {p!r} not in {SUPPORTED_EXPONENTS}")
    return float(np.dot(u.grid.pairing_weights, np.abs(u.values) ** p))


def dirichlet_energy(u: RadialField) -> float:
    """4*pi * int_0^R u'(r)^2 r^2 dr = 4*pi * int_0^R v'(r)^2 dr with v = r*u"""
    grid = u.grid
    v = grid.r * u.values
    v[0] = 0.0
    return float(FOUR_PI * np.sum(np.diff(v) ** 2) / grid.h)


def apply_neg_laplacian(u: RadialField) -> RadialField:
    """-u'' - (2/r)u' as (-v'')/r on interior nodes; 6(u_0 - u_1)/h^2 at the origin"""
    grid = u.grid
    h2 = grid.h ** 2
    v = grid.r * u.values
    v[0] = 0.0
    out = np.zeros(grid.M + 1)
    inside = grid.interior
    out[inside] = (2.0 * v[1:-1] - v[:-2] - v[2:]) / (h2 * grid.r[inside])
    out[0] = 6.0 * (u.values[0] - u.values[1]) / h2
    return RadialField(grid, out)


def solve_neg_laplacian(rhs: RadialField) -> RadialField:
    """Solve -Delta x = rhs with x(R) = 0 on the interior; x_0 from the origin stencil"""
    grid = rhs.grid
    inside = grid.interior
    w = scipy.linalg.cho_solve_banded((grid.laplacian_factor, False), grid.r[inside] * rhs.values[inside])
    x = np.zeros(grid.M + 1)
    x[inside] = w / grid.r[inside]
    x[0] = x[1] + grid.h ** 2 * rhs.values[0] / 6.0
    return RadialField(grid, x)


def random_bump_field(grid: RadialGrid, rng: np.random.Generator, modes: int = 6,
                      positive: bool = False) -> RadialField:
    """Short sum of sin(k*pi*r/R)/r modes with decaying random amplitudes.

    sin(k*pi*r/R)/r is smooth through r = 0 (value k*pi/R) and vanishes at R.
    """
    amplitudes = rng.normal(size=modes) / np.arange(1, modes + 1) ** 2
    if positive:
        amplitudes = np.abs(amplitudes)
        # |sin(kx)| <= k|sin(x)|, so a dominant first mode keeps the sum positive
        amplitudes[0] = max(amplitudes[0], 1.5 * np.dot(np.arange(2, modes + 1), amplitudes[1:]) + 0.1)
    values = np.zeros(grid.M + 1)
    for k, amplitude in enumerate(amplitudes, start=1):
        # np.sinc(x) = sin(pi x)/(pi x)
        values += amplitude * (k * math.pi / grid.R) * np.sinc(k * grid.r / grid.R)
    values[-1] = 0.0
    return RadialField(grid, values)
