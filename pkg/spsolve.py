#!/usr/bin/env python3
"""
spsolve
=======

Command-line runner for the radial critical Schrodinger-Poisson solver.

HOW TO USE:
    python spsolve.py eigen --M 2048
    python spsolve.py ground --R 1 --M 1024 --lambda-rel 0.5 --q 1
    python spsolve.py instanton --M 8192 --eps-schedule 1e-1,1e-2,1e-3
    python spsolve.py probe --lambda -1 --probe-schedule 256,512,1024,2048
    python spsolve.py sweep --sweep-lambda-rel 0.4,0.6,0.8 --sweep-q 1 --workers 3

EXIT CODES:
    0 success, 2 configuration error, 3 convergence failure (single runs), 4 output error
"""

import logging
import sys
from typing import List, Optional, Sequence

import numpy as np

from sysconfigs.logger import set_log_level
from scripts.energy import compactness_threshold
from scripts.groundstate import SolveOptions, cross_check_levels, minimize_ground_state, verify_ground_state_level
from scripts.instanton import (
    default_cutoff, discrete_sobolev_estimate, eps_min, estimate_S_and_K, instanton_field, instanton_report,
    lambda_root_of_A,
)
from scripts.pohozaev import nonexistence_probe
from scripts.poisson_reduction import essi_gap
from scripts.radial_core import PhysParams, build_grid, random_bump_field
from scripts.report_writer import RunReport, emit_outputs, load_solution_field, preflight_output_dir
from scripts.run_config import RunConfig, parse_config, resolve_lambda
from scripts.solver_config import CONFIG, SOBOLEV_S_ORACLE
from scripts.solver_errors import ConfigurationError, ConvergenceError, OutputError, SolverError
from scripts.spectral import continuum_lambda1, principal_eigenpair
from scripts.sweep_runner import run_sweep

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_OUTPUT = 0, 2, 3, 4


def _refinement_levels(M: int) -> List[int]:
    levels = [M // 2 ** k for k in reversed(range(CONFIG["refinement_levels"]))]
    return [m for m in levels if m >= 16 and m % 2 == 0]


def _solve_options(cfg: RunConfig, grid) -> SolveOptions:
    start = load_solution_field(cfg.init_file, grid) if cfg.init == "file" else None
    return SolveOptions(max_iters=cfg.max_iters, grad_tol=cfg.grad_tol, init=cfg.init,
                        eps=cfg.init_eps, start=start, seed=cfg.seed)


def run_eigen(cfg: RunConfig) -> RunReport:
    exact = continuum_lambda1(cfg.R)
    rows = []
    for M in _refinement_levels(cfg.M):
        eigen = principal_eigenpair(build_grid(cfg.R, M))
        error = abs(eigen.lambda1 - exact) / exact
        ratio = rows[-1]["relative_error"] / error if rows else float("nan")
        rows.append({"M": M, "lambda1": eigen.lambda1, "relative_error": error, "error_ratio": ratio})
    report = RunReport(command="eigen", R=cfg.R, M=cfg.M, q=cfg.q, lambda1=rows[-1]["lambda1"],
                       eigen_refinement=rows)
    report.notes.append(f"continuum lambda_1 = (pi/R)^2 = {exact:.12g}")
    return report


def run_instanton(cfg: RunConfig) -> RunReport:
    grid = build_grid(cfg.R, cfg.M)
    eigen = principal_eigenpair(grid)
    params = PhysParams(lam=resolve_lambda(cfg, eigen.lambda1), q=cfg.q, R=cfg.R)
    cutoff = default_cutoff(cfg.R)
    estimate = estimate_S_and_K(cfg.eps_schedule, cutoff, grid, params, fit_degree=cfg.fit_degree)
    rows = [instanton_report(eps, cutoff, params, grid, estimate.S_est, estimate.K_est) for eps in cfg.eps_schedule]
    best = min(rows, key=lambda row: row.supJ)
    threshold = compactness_threshold(estimate.S_est, params.q)
    report = RunReport(command="instanton", R=cfg.R, M=cfg.M, q=cfg.q, lam=params.lam, lambda1=eigen.lambda1,
                       estimate=estimate, instanton_rows=rows,
                       A_root=lambda_root_of_A(cutoff, params, estimate.K_est, eigen.lambda1))
    report.level_rows.append({"quantity": f"min sup J(t u_eps) (eps = {best.eps:.3e})", "value": best.supJ,
                              "threshold": threshold, "below_threshold": best.supJ < threshold})
    return report


def _level_candidates(cfg: RunConfig, grid, eigen):
    candidates, labels = [eigen.e1], ["e_1"]
    cutoff = default_cutoff(cfg.R)
    resolvable = [eps for eps in cfg.eps_schedule if eps >= eps_min(grid)]
    for eps in resolvable[-3:]:
        candidates.append(instanton_field(eps, cutoff, grid))
        labels.append(f"instanton eps={eps:.3e}")
    rng = np.random.default_rng(cfg.seed)
    for k in range(5):
        candidates.append(random_bump_field(grid, rng, positive=True))
        labels.append(f"random bump {k}")
    return candidates, labels


def _coarse_ground_state(cfg: RunConfig, params: PhysParams, M: int, opts: SolveOptions):
    coarse = build_grid(cfg.R, M)
    if cfg.lambda_abs is None:
        # a relative lambda follows the discrete lambda_1 of each grid
        params = params.with_lambda(resolve_lambda(cfg, principal_eigenpair(coarse).lambda1))
    return minimize_ground_state(params, coarse, opts.replace(init="eig", start=None))


def run_ground(cfg: RunConfig) -> RunReport:
    grid = build_grid(cfg.R, cfg.M)
    eigen = principal_eigenpair(grid)
    params = PhysParams(lam=resolve_lambda(cfg, eigen.lambda1), q=cfg.q, R=cfg.R)
    opts = _solve_options(cfg, grid)
    gs = minimize_ground_state(params, grid, opts, eigen)
    report = RunReport(command="ground", R=cfg.R, M=cfg.M, q=cfg.q, lam=params.lam, lambda1=eigen.lambda1,
                       ground=gs)
    report.notes.append("c is the infimum of the Nehari quotient sup_t I(tu); it is taken as the "
                        "mountain-pass level since each fiber alpha t^2 - beta t^10 has one interior maximum")

    sobolev = discrete_sobolev_estimate(grid)
    S_disc = sobolev.value
    status = "converged" if sobolev.converged else "not converged, an upper bound"
    report.notes.append(f"S_disc = {S_disc:.10f} after {sobolev.iterations} descent iterations "
                        f"(gradient norm {sobolev.gradient_norm:.3e}, {status})")
    for name, S in (("S_disc", S_disc), ("S (continuum)", SOBOLEV_S_ORACLE)):
        threshold = compactness_threshold(S, params.q)
        report.level_rows.append({"quantity": f"c vs (2/5) sqrt({name}^3/q)", "value": gs.level_c,
                                  "threshold": threshold, "below_threshold": gs.level_c < threshold})
    report.notes.append(f"Poisson bound gap at u with S_disc: {essi_gap(gs.u, params, S_disc):.6e}")
    if cfg.continuum_essi:
        report.notes.append(f"Poisson bound gap at u with continuum S: "
                            f"{essi_gap(gs.u, params, SOBOLEV_S_ORACLE):.6e}")

    previous = None
    for M in _refinement_levels(cfg.M):
        level = gs if M == cfg.M else _coarse_ground_state(cfg, params, M, opts)
        ratio = previous / level.pohozaev_residual if previous else float("nan")
        report.refinement.append({"M": M, "c": level.level_c, "pohozaev_residual": level.pohozaev_residual,
                                  "ratio": ratio})
        previous = level.pohozaev_residual

    candidates, labels = _level_candidates(cfg, grid, eigen)
    report.level_check = verify_ground_state_level(gs, candidates, params, labels=labels)
    if cfg.cross_check:
        report.cross_check = cross_check_levels(params, grid, opts.replace(start=None), eigen=eigen)
    return report


def run_probe(cfg: RunConfig) -> RunReport:
    finest = build_grid(cfg.R, max(cfg.probe_schedule))
    eigen = principal_eigenpair(finest)
    params = PhysParams(lam=resolve_lambda(cfg, eigen.lambda1), q=cfg.q, R=cfg.R)
    opts = SolveOptions(max_iters=cfg.probe_max_iters, grad_tol=cfg.grad_tol, seed=cfg.seed)
    probe = nonexistence_probe(params, cfg.probe_schedule, opts, eigen=eigen)
    report = RunReport(command="probe", R=cfg.R, M=finest.M, q=cfg.q, lam=params.lam, lambda1=eigen.lambda1,
                       probe=probe)
    if probe.regime == "window":
        report.notes.append("lambda lies inside the existence window; use `ground` instead")
    return report


def run_sweep_command(cfg: RunConfig):
    grid = build_grid(cfg.R, cfg.M)
    eigen = principal_eigenpair(grid)
    rows = run_sweep(cfg)
    report = RunReport(command="sweep", R=cfg.R, M=cfg.M, q=cfg.q, lambda1=eigen.lambda1)
    sobolev = discrete_sobolev_estimate(grid)
    status = "converged" if sobolev.converged else "not converged, an upper bound"
    report.notes.append(f"thresholds use S_disc = {sobolev.value:.10f} ({status}, "
                        f"gradient norm {sobolev.gradient_norm:.3e})")
    report.notes.append("S_est, K_est and A(phi) are reported by `spsolve instanton`, the Pohozaev refinement "
                        "table by `spsolve ground`; each sweep row carries its own Pohozaev residual")
    return rows, report


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        set_log_level(cfg.log_level)
        preflight_output_dir(cfg.out_dir)
        logger.info(f"spsolve {cfg.command}: R={cfg.R}, M={cfg.M}, q={cfg.q}, out={cfg.out_dir}")

        rows = []
        if cfg.command == "eigen":
            report = run_eigen(cfg)
        elif cfg.command == "instanton":
            report = run_instanton(cfg)
        elif cfg.command == "ground":
            report = run_ground(cfg)
        elif cfg.command == "probe":
            report = run_probe(cfg)
        else:
            rows, report = run_sweep_command(cfg)
        emit_outputs(rows, report, cfg)

        if report.ground is not None and not report.ground.converged:
            raise ConvergenceError(f"ground state not converged after {report.ground.iterations} iterations "
                                   f"(gradient norm {report.ground.gradient_norm:.3e})",
                                   last_iterate=report.ground.u)
    except OutputError as e:
        logger.error(f"Output error: {e}")
        return EXIT_OUTPUT
    except ConvergenceError as e:
        logger.error(f"Convergence failure: {e}")
        return EXIT_CONVERGENCE
    except (ConfigurationError, SolverError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    print("\n" + "=" * 50)
    print(f"spsolve {cfg.command} completed, outputs in {cfg.out_dir}")
    print("=" * 50)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
