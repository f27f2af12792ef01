"""
Sweep Runner
============

Runs the (lambda / lambda_1, q) grid of a RunConfig and returns one SweepRow per
point, lambda-major then q, whatever order the workers finish in.

HOW TO USE:
    rows = run_sweep(parse_config(["sweep", "--sweep-lambda-rel", "0.4,0.6,0.8"]))

NOTES:
- Points inside the existence window run the ground-state descent; a point that
  stops short of the tolerance is retried once with a doubled iteration budget.
- Points at lambda <= 0 or in the open regime record the probe diagnostics at the run M.
- Points at lambda >= lambda_1 record the missing fibering maximum.
- A failing point records its error in the `note` column; the sweep continues.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass
from multiprocessing import Pool
from typing import Any, Dict, List

from tenacity import Retrying, retry_if_exception_type, stop_after_attempt
from tqdm import tqdm

from scripts.energy import compactness_threshold
from scripts.groundstate import SolveOptions, minimize_ground_state
from scripts.instanton import discrete_sobolev_constant
from scripts.pohozaev import EVIDENCE_WORDING, classify_lambda, concentration_radius, probe_level
from scripts.radial_core import PhysParams, build_grid, lp_mass
from scripts.run_config import RunConfig, code_version, config_hash
from scripts.solver_config import SWEEP_COLUMNS
from scripts.solver_errors import ConvergenceError, NoFiberMaxError, SolverError
from scripts.spectral import principal_eigenpair

logger = logging.getLogger(__name__)


@dataclass
class SweepRow:
    lambda_over_lambda1: float
    q: float
    R: float
    M: int
    c: float
    threshold: float
    below_threshold: bool
    pde_residual: float
    pohozaev_residual: float
    concentration_radius: float
    converged: bool
    iterations: int
    wall_time: float
    code_version: str
    config_hash: str
    note: str = ""

    def as_record(self) -> Dict[str, Any]:
        record = asdict(self)
        return {column: record[column] for column in SWEEP_COLUMNS}


@dataclass(frozen=True)
class SweepTask:
    lambda_rel: float
    q: float
    R: float
    M: int
    S_disc: float
    max_iters: int
    grad_tol: float
    probe_max_iters: int
    retry_attempts: int
    init: str
    seed: int
    code_version: str
    config_hash: str


def _solve_with_retry(params: PhysParams, grid, opts: SolveOptions, attempts: int, eigen):
    """Ground state; a non-converged attempt is repeated with max_iters times the attempt number"""
    retrying = Retrying(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(ConvergenceError),
        reraise=True,
    )
    for attempt in retrying:
        with attempt:
            budget = opts.max_iters * attempt.retry_state.attempt_number
            gs = minimize_ground_state(params, grid, opts.replace(max_iters=budget), eigen)
            if not gs.converged:
                raise ConvergenceError(
                    f"not converged in {budget} iterations (gradient norm {gs.gradient_norm:.3e})",
                    last_iterate=gs,
                )
    return gs


def solve_point(task: SweepTask) -> SweepRow:
    """One sweep point; every SolverError ends up in the row note"""
    start = time.perf_counter()
    threshold = compactness_threshold(task.S_disc, task.q)
    row = SweepRow(
        lambda_over_lambda1=task.lambda_rel, q=task.q, R=task.R, M=task.M,
        c=math.nan, threshold=threshold, below_threshold=False,
        pde_residual=math.nan, pohozaev_residual=math.nan, concentration_radius=math.nan,
        converged=False, iterations=0, wall_time=0.0,
        code_version=task.code_version, config_hash=task.config_hash,
    )
    try:
        grid = build_grid(task.R, task.M)
        eigen = principal_eigenpair(grid)
        params = PhysParams(lam=task.lambda_rel * eigen.lambda1, q=task.q, R=task.R)
        regime = classify_lambda(params.lam, eigen.lambda1)
        opts = SolveOptions(max_iters=task.max_iters, grad_tol=task.grad_tol,
                            init=task.init if task.init != "file" else "eig", seed=task.seed)

        if regime == "window":
            try:
                gs = _solve_with_retry(params, grid, opts, task.retry_attempts, eigen)
            except ConvergenceError as e:
                gs = e.last_iterate
                row.note = f"{e} after {task.retry_attempts} attempts"
            row.c, row.converged, row.iterations = gs.level_c, gs.converged, gs.iterations
            row.pde_residual, row.pohozaev_residual = gs.pde_residual, gs.pohozaev_residual
            row.concentration_radius = concentration_radius(gs.u)
        elif regime == "above":
            # a - lambda b along e_1, written without the round-off of a - lambda_1 b at lambda = lambda_1
            raise NoFiberMaxError((eigen.lambda1 - params.lam) * lp_mass(eigen.e1, 2))
        else:
            probe = probe_level(params, grid, opts.replace(max_iters=task.probe_max_iters))
            row.c, row.converged, row.iterations = probe.c, probe.converged, probe.iterations
            row.pde_residual, row.pohozaev_residual = probe.pde_residual, probe.pohozaev_residual
            row.concentration_radius = probe.concentration_radius
            row.note = f"{regime} regime probe: {EVIDENCE_WORDING}"
        row.below_threshold = bool(row.c < row.threshold)
    except SolverError as e:
        logger.warning(f"Sweep point lambda/lambda_1={task.lambda_rel}, q={task.q} failed: {e}")
        row.note = f"{type(e).__name__}: {e}"
    row.wall_time = time.perf_counter() - start
    return row


def build_tasks(cfg: RunConfig) -> List[SweepTask]:
    grid = build_grid(cfg.R, cfg.M)
    S_disc = discrete_sobolev_constant(grid)
    version, digest = code_version(), config_hash(cfg)
    return [
        SweepTask(lambda_rel=lam_rel, q=q, R=cfg.R, M=cfg.M, S_disc=S_disc, max_iters=cfg.max_iters,
                  grad_tol=cfg.grad_tol, probe_max_iters=cfg.probe_max_iters,
                  retry_attempts=cfg.retry_attempts, init=cfg.init, seed=cfg.seed,
                  code_version=version, config_hash=digest)
        for lam_rel in cfg.sweep_lambda_rel
        for q in cfg.sweep_q
    ]


def run_sweep(cfg: RunConfig) -> List[SweepRow]:
    """Rows in config order (lambda-major, then q); failures are recorded in-row"""
    tasks = build_tasks(cfg)
    logger.info(f"Sweep: {len(tasks)} points on M={cfg.M} with {cfg.workers} worker(s)")
    if cfg.workers > 1 and len(tasks) > 1:
        with Pool(processes=min(cfg.workers, len(tasks))) as pool:
            # imap keeps submission order
            rows = list(tqdm(pool.imap(solve_point, tasks), total=len(tasks), desc="sweep"))
    else:
        rows = [solve_point(task) for task in tqdm(tasks, desc="sweep")]

    print("\n" + "=" * 50)
    print("SWEEP SUMMARY")
    print("=" * 50)
    for row in rows:
        status = "below" if row.below_threshold else "NOT below"
        print(f"lambda/lambda_1={row.lambda_over_lambda1:+.3f} q={row.q:g}: c={row.c:.8g} "
              f"{status} threshold {row.threshold:.8g}, converged={row.converged} {row.note}")
    return rows
