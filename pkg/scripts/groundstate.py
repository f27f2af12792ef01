"""
Ground State Solver
===================

Positive ground state of the critical Schrodinger-Poisson system on B_R,
computed by minimizing the 0-homogeneous Nehari quotient W with Sobolev-gradient
descent and rescaling every iterate onto the Nehari manifold.

HOW TO USE:
    grid = build_grid(1.0, 1024)
    eigen = principal_eigenpair(grid)
    params = PhysParams(lam=0.5 * eigen.lambda1, q=1.0, R=1.0)
    gs = minimize_ground_state(params, grid, SolveOptions(), eigen=eigen)

FUNCTIONS:
- minimize_ground_state: descent on W from an eigenfunction, instanton, random or supplied start
- pde_residual: L^2 residuals of both equations and their rows at r = 0
- verify_ground_state_level: sup_t I(tv) >= c for a list of competitors
- cross_check_levels: the same solve from several initializers, levels compared
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from scripts.energy import (
    LEVEL_ASSUMPTION, energy_I, fiber_tstar, nehari_projection, nehari_quotient_with_gradient,
)
from scripts.instanton import default_cutoff, eps_min, instanton_field
from scripts.pohozaev import pohozaev_residual
from scripts.poisson_reduction import solve_phi
from scripts.radial_core import (
    PhysParams, RadialField, RadialGrid, apply_neg_laplacian, check_same_grid, inner, random_bump_field,
)
from scripts.sobolev_descent import DescentSettings, sobolev_descent
from scripts.solver_config import CONFIG, INIT_CHOICES
from scripts.solver_errors import (
    ConfigurationError, DegenerateFieldError, GridMismatchError, NoFiberMaxError,
)
from scripts.spectral import EigenPair, principal_eigenpair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveOptions:
    """Descent budget, tolerances and the initializer"""

    max_iters: int = CONFIG["max_iters"]
    grad_tol: float = CONFIG["grad_tol"]
    init: str = CONFIG["init"]
    eps: Optional[float] = CONFIG["init_eps"]  # instanton start; None means 4 * eps_min
    start: Optional[RadialField] = None  # supplied start for init == "file"
    seed: int = CONFIG["seed"]
    initial_step: float = CONFIG["initial_step"]
    step_shrink: float = CONFIG["step_shrink"]
    min_step: float = CONFIG["min_step"]
    armijo_c1: float = CONFIG["armijo_c1"]

    def __post_init__(self):
        if isinstance(self.max_iters, bool) or not isinstance(self.max_iters, int) or self.max_iters < 1:
            raise ConfigurationError(f"need at least one iteration, got {self.max_iters!r}", field="max_iters")
        if not self.grad_tol > 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.grad_tol!r}", field="grad_tol")
        if self.init not in INIT_CHOICES:
            raise ConfigurationError(f"unknown initializer {self.init!r}, expected one of {INIT_CHOICES}",
                                     field="init")
        if self.init == "file" and self.start is None:
            raise ConfigurationError("init 'file' needs a supplied field", field="init_file")
        if self.eps is not None and not self.eps > 0:
            raise ConfigurationError(f"instanton eps must be positive, got {self.eps!r}", field="init_eps")
        if not 0.0 < self.step_shrink < 1.0:
            raise ConfigurationError(f"step shrink must lie in (0, 1), got {self.step_shrink!r}",
                                     field="step_shrink")
        if not (self.initial_step > 0 and self.min_step > 0 and self.armijo_c1 > 0):
            raise ConfigurationError("step sizes and the Armijo constant must be positive", field="step_rule")

    def descent_settings(self) -> DescentSettings:
        return DescentSettings(max_iters=self.max_iters, grad_tol=self.grad_tol,
                               initial_step=self.initial_step, shrink=self.step_shrink,
                               min_step=self.min_step, armijo_c1=self.armijo_c1)

    def replace(self, **changes) -> "SolveOptions":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return SolveOptions(**values)


@dataclass(frozen=True)
class PdeResidual:
    """L^2 residuals of both equations, plus their rows at r = 0.

    The L^2 pairing gives node 0 no weight, so the origin rows are reported
    separately in absolute value. With u_0 rebuilt from u_1 and u_2 they carry
    the O(h^2) truncation of the origin stencil.
    """

    u_equation: float  # || -Delta u - lambda u - q phi |u|^3 u ||
    phi_equation: float  # || -Delta phi - q |u|^5 ||
    origin_u: float = 0.0
    origin_phi: float = 0.0

    @property
    def worst(self) -> float:
        return max(self.u_equation, self.phi_equation)


@dataclass
class GroundState:
    u: RadialField
    phi: RadialField
    level_c: float
    pde_residual: float
    phi_residual: float
    pohozaev_residual: float
    iterations: int
    converged: bool
    nehari_pairing: float = 0.0  # <I'(u), u>
    t_star: float = 1.0
    energy: float = 0.0  # I(u)
    gradient_norm: float = 0.0
    stalled: bool = False
    init: str = ""
    origin_residual: float = 0.0  # worst origin row of the two equations
    history: List[float] = field(default_factory=list, repr=False)

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.u.values[:-1] > 0.0))


def _l2_norm(values: np.ndarray, grid: RadialGrid) -> float:
    residual = RadialField(grid, values)
    return float(np.sqrt(inner(residual, residual)))


def pde_residual(u: RadialField, phi: RadialField, params: PhysParams) -> PdeResidual:
    """Discrete L^2(B_R) norms of the residuals of both equations and their origin rows"""
    grid = check_same_grid(u, phi)
    coupling = phi.values * np.abs(u.values) ** 3 * u.values
    first = apply_neg_laplacian(u).values - params.lam * u.values - params.q * coupling
    second = apply_neg_laplacian(phi).values - params.q * np.abs(u.values) ** 5
    first[-1] = second[-1] = 0.0
    return PdeResidual(u_equation=_l2_norm(first, grid), phi_equation=_l2_norm(second, grid),
                       origin_u=abs(float(first[0])), origin_phi=abs(float(second[0])))


def initial_field(params: PhysParams, grid: RadialGrid, opts: SolveOptions,
                  eigen: Optional[EigenPair] = None) -> RadialField:
    if opts.init == "eig":
        if eigen is None or not eigen.grid.same_as(grid):
            eigen = principal_eigenpair(grid)
        return eigen.e1
    if opts.init == "instanton":
        eps = opts.eps if opts.eps is not None else 4.0 * eps_min(grid)
        return instanton_field(eps, default_cutoff(params.R), grid)
    if opts.init == "random":
        return random_bump_field(grid, np.random.default_rng(opts.seed), positive=True)
    if not opts.start.grid.same_as(grid):
        raise GridMismatchError(f"supplied field has M={opts.start.grid.M}, solve grid has M={grid.M}")
    if opts.start.is_zero():
        raise DegenerateFieldError("supplied initial field is identically zero")
    return RadialField(grid, opts.start.values)


def minimize_ground_state(params: PhysParams, grid: RadialGrid, opts: SolveOptions = SolveOptions(),
                          eigen: Optional[EigenPair] = None) -> GroundState:
    """Minimize W over the admissible cone and return the Nehari-scaled minimizer.

    Raises NoFiberMaxError when a - lambda b <= 0 at the initializer. Hitting
    the iteration cap is not an error: the result carries converged = False.
    """
    if abs(params.R - grid.R) > 1e-12 * grid.R:
        raise ConfigurationError(f"params R={params.R} does not match grid R={grid.R}", field="R")
    u0 = abs(initial_field(params, grid, opts, eigen))
    try:
        fiber_tstar(u0, params)
    except NoFiberMaxError as e:
        logger.error(f"Initializer '{opts.init}' has no fibering maximum at lambda = {params.lam:.6g}: "
                     f"a - lambda b = {e.a_minus_lambda_b:.6e}; lambda >= lambda_1 along this direction")
        raise

    label = f"ground state (lambda={params.lam:.6g}, q={params.q:g}, M={grid.M}, init={opts.init})"
    result = sobolev_descent(
        lambda u: nehari_quotient_with_gradient(u, params),
        u0,
        lambda u: nehari_projection(u, params),
        opts.descent_settings(),
        label=label,
    )
    u = result.u
    reduced = solve_phi(u, params)
    breakdown = energy_I(u, params)
    fiber = fiber_tstar(u, params)
    residual = pde_residual(u, reduced.phi, params)
    poho = pohozaev_residual(u, reduced.phi, params)

    if not result.converged:
        logger.warning(f"{label}: not converged after {result.iterations} iterations "
                       f"(gradient norm {result.gradient_norm:.3e} > {opts.grad_tol:.1e})")
    logger.debug(f"Level reported under: {LEVEL_ASSUMPTION}")
    return GroundState(
        u=u,
        phi=reduced.phi,
        level_c=result.value,
        pde_residual=residual.u_equation,
        phi_residual=residual.phi_equation,
        pohozaev_residual=poho.residual,
        origin_residual=max(residual.origin_u, residual.origin_phi),
        iterations=result.iterations,
        converged=result.converged,
        nehari_pairing=fiber.nehari_pairing,
        t_star=fiber.t_star,
        energy=breakdown.i_val,
        gradient_norm=result.gradient_norm,
        stalled=result.stalled,
        init=opts.init,
        history=result.history,
    )


@dataclass
class LevelCheckEntry:
    label: str
    sup_level: Optional[float]
    margin: Optional[float]  # sup_level - c
    status: str  # ok | violation | skipped
    reason: str = ""


@dataclass
class LevelCheckReport:
    level_c: float
    tolerance: float
    entries: List[LevelCheckEntry] = field(default_factory=list)

    @property
    def violations(self) -> List[LevelCheckEntry]:
        return [entry for entry in self.entries if entry.status == "violation"]

    @property
    def checked(self) -> int:
        return sum(1 for entry in self.entries if entry.status != "skipped")


def verify_ground_state_level(gs: GroundState, candidates: Sequence[RadialField], params: PhysParams,
                              tolerance: float = CONFIG["level_check_tol"],
                              labels: Optional[Sequence[str]] = None) -> LevelCheckReport:
    """sup_t I(tv) >= c - tolerance for every candidate v; violations are entries, not exceptions"""
    labels = list(labels) if labels is not None else [f"candidate {i}" for i in range(len(candidates))]
    report = LevelCheckReport(level_c=gs.level_c, tolerance=tolerance)
    for label, candidate in zip(labels, candidates):
        try:
            sup_level = fiber_tstar(candidate, params).level
        except (NoFiberMaxError, DegenerateFieldError) as e:
            report.entries.append(LevelCheckEntry(label, None, None, "skipped", str(e)))
            continue
        margin = sup_level - gs.level_c
        status = "ok" if margin >= -tolerance else "violation"
        if status == "violation":
            logger.warning(f"Level check: {label} reaches sup I(tv) = {sup_level:.12g} below c = {gs.level_c:.12g}")
        report.entries.append(LevelCheckEntry(label, sup_level, margin, status))
    logger.info(f"Level check: {report.checked} candidates checked, {len(report.violations)} violations")
    return report


@dataclass
class LevelCrossCheck:
    levels: Dict[str, float]
    converged: Dict[str, bool]
    spread: float  # (max - min) / min over the levels
    agree: bool
    states: Dict[str, GroundState] = field(default_factory=dict, repr=False)


def cross_check_levels(params: PhysParams, grid: RadialGrid, opts: SolveOptions,
                       inits: Tuple[str, ...] = ("eig", "instanton"), rel_tol: float = 1e-4,
                       eigen: Optional[EigenPair] = None) -> LevelCrossCheck:
    """Solve once per initializer; disagreeing levels are reported side by side, none is preferred"""
    states = {init: minimize_ground_state(params, grid, opts.replace(init=init), eigen) for init in inits}
    levels = {init: state.level_c for init, state in states.items()}
    low, high = min(levels.values()), max(levels.values())
    spread = (high - low) / low
    agree = spread <= rel_tol
    if not agree:
        logger.warning(f"Initializers disagree on the level beyond {rel_tol:.1e}: {levels}")
    return LevelCrossCheck(levels=levels, converged={k: s.converged for k, s in states.items()},
                           spread=spread, agree=agree, states=states)
