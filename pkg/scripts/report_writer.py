"""
Report Writer
=============

CSV and Markdown outputs of a run, plus the input side of solution.csv.

FILES WRITTEN (into the run's output directory):
- sweep.csv     one row per sweep point, columns in SWEEP_COLUMNS order
- solution.csv  r, u(r), phi(r) of a ground state, M + 1 rows
- instanton.csv norms, t_eps and sup J per eps
- probe.csv     the nonexistence refinement table
- eigen.csv     lambda_1 under refinement
- report.md     window, constants, level-vs-threshold and Pohozaev tables
- run_meta.json configuration, its hash and the code version

Numbers go out in full double precision scientific notation; wall_time is
the only column that changes between identical runs.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from scripts.groundstate import GroundState, LevelCheckReport, LevelCrossCheck
from scripts.instanton import InstantonReport, SobolevEstimate
from scripts.pohozaev import ProbeReport
from scripts.radial_core import RadialField, RadialGrid
from scripts.run_config import RunConfig, code_version, config_hash
from scripts.solver_config import (
    INSTANTON_COLUMNS, INSTANTON_K_ORACLE, SOBOLEV_S_ORACLE, SOLUTION_COLUMNS, SWEEP_COLUMNS,
)
from scripts.solver_errors import ConfigurationError, GridMismatchError, OutputError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.16e"
PROBE_COLUMNS = ["M", "c", "threshold", "ratio", "S_disc", "concentration_radius",
                 "pohozaev_residual", "pde_residual", "gradient_norm", "converged", "iterations"]


@dataclass
class RunReport:
    """Everything a command produced, for report.md and the per-run CSVs"""

    command: str
    R: float
    M: int
    q: float
    lam: Optional[float] = None
    lambda1: Optional[float] = None
    eigen_refinement: List[Dict[str, Any]] = field(default_factory=list)
    estimate: Optional[SobolevEstimate] = None
    instanton_rows: List[InstantonReport] = field(default_factory=list)
    A_root: Optional[float] = None
    ground: Optional[GroundState] = None
    level_rows: List[Dict[str, Any]] = field(default_factory=list)  # c vs threshold
    refinement: List[Dict[str, Any]] = field(default_factory=list)  # Pohozaev under M doubling
    level_check: Optional[LevelCheckReport] = None
    cross_check: Optional[LevelCrossCheck] = None
    probe: Optional[ProbeReport] = None
    notes: List[str] = field(default_factory=list)


def preflight_output_dir(path: str) -> Path:
    """Create the output directory and prove it writable before any computation"""
    out_dir = Path(path)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".spsolve_write_test"
        with open(probe, "w") as f:
            f.write("ok")
        probe.unlink()
    except OSError as e:
        raise OutputError(f"output directory {out_dir} is not writable: {e}")
    return out_dir


def write_csv(records: Sequence[Dict[str, Any]], columns: Sequence[str], path: Path) -> Path:
    frame = pd.DataFrame(list(records), columns=list(columns))
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise OutputError(f"could not write {path}: {e}")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_sweep_csv(rows, path: Path) -> Path:
    return write_csv([row.as_record() for row in rows], SWEEP_COLUMNS, path)


def write_solution_csv(gs: GroundState, path: Path) -> Path:
    records = [{"r": r, "u": u, "phi": phi} for r, u, phi in zip(gs.grid.r, gs.u.values, gs.phi.values)]
    return write_csv(records, SOLUTION_COLUMNS, path)


def write_instanton_csv(reports: Sequence[InstantonReport], path: Path) -> Path:
    return write_csv([asdict(report) for report in reports], INSTANTON_COLUMNS, path)


def write_probe_csv(probe: ProbeReport, path: Path) -> Path:
    records = [dict(asdict(row), ratio=row.ratio) for row in probe.rows]
    return write_csv(records, PROBE_COLUMNS, path)


def load_solution_field(path: str, grid: RadialGrid) -> RadialField:
    """u column of a solution.csv written on the same grid"""
    if not Path(path).is_file():
        raise ConfigurationError(f"{path} not found", field="init_file")
    frame = pd.read_csv(path)
    missing = [column for column in ("r", "u") if column not in frame.columns]
    if missing:
        raise ConfigurationError(f"{path} lacks columns {missing}", field="init_file")
    if len(frame) != grid.M + 1 or not np.allclose(frame["r"].to_numpy(), grid.r, rtol=0, atol=1e-12 * grid.R):
        raise GridMismatchError(f"{path} holds {len(frame)} nodes, the run grid has {grid.M + 1} (R={grid.R})")
    values = frame["u"].to_numpy(dtype=float)
    values[-1] = 0.0
    return RadialField(grid, values)


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "yes" if value else "no"
    if isinstance(value, (float, np.floating)):
        return f"{value:.8g}"
    return str(value)


def markdown_table(columns: Sequence[str], records: Sequence[Dict[str, Any]]) -> List[str]:
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for record in records:
        lines.append("| " + " | ".join(_cell(record.get(column, "")) for column in columns) + " |")
    return lines


def render_report(report: RunReport, cfg: RunConfig, sweep_rows=None) -> str:
    lines = [
        f"# spsolve {report.command} report",
        "",
        f"- code version: {code_version()}",
        f"- config hash: `{config_hash(cfg)}`",
        f"- R = {report.R:g}, M = {report.M}, q = {report.q:g}",
    ]
    if report.lam is not None:
        lines.append(f"- lambda = {report.lam:.12g}")
    if report.lambda1 is not None:
        lines.append(f"- lambda_1 = {report.lambda1:.12g}; existence window "
                     f"({0.3 * report.lambda1:.12g}, {report.lambda1:.12g})")
    lines.append("")

    if report.eigen_refinement:
        lines += ["## Principal eigenvalue under refinement", ""]
        lines += markdown_table(["M", "lambda1", "relative_error", "error_ratio"], report.eigen_refinement)
        lines.append("")

    if report.estimate is not None:
        est = report.estimate
        lines += ["## Sobolev constant and instanton norm", "",
                  f"- S_est = {est.S_est:.8g} (reference {SOBOLEV_S_ORACLE:.8g}, deviation {est.S_deviation:+.3e})",
                  f"- K_est = {est.K_est:.8g} (reference {INSTANTON_K_ORACLE:.8g}, deviation {est.K_deviation:+.3e})",
                  f"- fit degree {est.fit_degree} in sqrt(eps); max relative fit residuals "
                  f"S {est.fit_residual_S:.2e}, K {est.fit_residual_K:.2e}"]
        if est.S_disc is not None:
            lines.append(f"- S_disc (grid infimum) = {est.S_disc:.8g}")
        if report.A_root is not None and report.lambda1:
            lines.append(f"- A(phi) changes sign at lambda = {report.A_root:.10g} "
                         f"= {report.A_root / report.lambda1:.8f} lambda_1")
        lines.append("")
    if report.instanton_rows:
        lines += markdown_table(["eps", "grad_sq", "l6_sq", "t_eps", "supJ", "supJ_formula", "threshold", "A_phi"],
                                [asdict(row) for row in report.instanton_rows])
        lines.append("")

    if report.ground is not None:
        gs = report.ground
        lines += ["## Ground state", "",
                  f"- init {gs.init}, converged: {_cell(gs.converged)} after {gs.iterations} iterations "
                  f"(gradient norm {gs.gradient_norm:.3e})",
                  f"- level c = {gs.level_c:.12g}, I(u) = {gs.energy:.12g}",
                  f"- PDE residuals: u-equation {gs.pde_residual:.3e}, phi-equation {gs.phi_residual:.3e}, "
                  f"origin row {gs.origin_residual:.3e}",
                  f"- Nehari pairing {gs.nehari_pairing:.3e}, t_star {gs.t_star:.12g}, positive: {_cell(gs.is_positive)}",
                  ""]
    if report.level_rows:
        lines += ["## Level against the compactness threshold", ""]
        lines += markdown_table(["quantity", "value", "threshold", "below_threshold"], report.level_rows)
        lines.append("")
    if report.refinement:
        lines += ["## Pohozaev residual under refinement", ""]
        lines += markdown_table(["M", "c", "pohozaev_residual", "ratio"], report.refinement)
        lines.append("")
    if report.level_check is not None:
        check = report.level_check
        lines += [f"## Ground-state minimality ({check.checked} competitors, "
                  f"{len(check.violations)} violations at tolerance {check.tolerance:.1e})", ""]
        lines += markdown_table(["label", "sup_level", "margin", "status", "reason"],
                                [asdict(entry) for entry in check.entries])
        lines.append("")
    if report.cross_check is not None:
        cross = report.cross_check
        lines += ["## Initializer cross-check", "",
                  f"- relative spread {cross.spread:.3e}; agree: {_cell(cross.agree)}"]
        lines += [f"- {init}: c = {level:.12g} (converged {_cell(cross.converged[init])})"
                  for init, level in cross.levels.items()]
        lines.append("")

    if report.probe is not None:
        probe = report.probe
        lines += [f"## Nonexistence probe ({probe.regime} regime)", ""]
        if probe.banner:
            lines += [f"**{probe.banner}**", ""]
        if probe.obstruction is not None:
            lines.append(f"- no fibering maximum along e_1: a - lambda b = {probe.obstruction:.6e}")
        if probe.eigen_test is not None:
            lines.append(f"- e_1 test: (lambda_1 - lambda)<u, e_1> = {probe.eigen_test.lhs:.6e}, "
                         f"q<phi |u|^3 u, e_1> = {probe.eigen_test.rhs:.6e}")
        if probe.rows:
            lines += [f"- {probe.wording}", ""]
            lines += markdown_table(PROBE_COLUMNS, [dict(asdict(row), ratio=row.ratio) for row in probe.rows])
        lines.append("")

    if sweep_rows:
        lines += ["## Sweep: level against threshold", ""]
        lines += markdown_table(["lambda_over_lambda1", "q", "c", "threshold", "below_threshold",
                                 "converged", "pde_residual", "pohozaev_residual", "note"],
                                [row.as_record() for row in sweep_rows])
        lines.append("")

    if report.notes:
        lines += ["## Notes", ""] + [f"- {note}" for note in report.notes] + [""]
    return "\n".join(lines)


def write_run_meta(cfg: RunConfig, path: Path) -> Path:
    meta = {"code_version": code_version(), "config_hash": config_hash(cfg), "config": cfg.to_dict()}
    try:
        with open(path, "w") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
    except OSError as e:
        raise OutputError(f"could not write {path}: {e}")
    return path


def emit_outputs(rows, report: RunReport, cfg: RunConfig) -> List[Path]:
    """Write every output the run produced; returns the written paths"""
    out_dir = preflight_output_dir(cfg.out_dir)
    written: List[Path] = []
    if "csv" in cfg.formats:
        if rows:
            written.append(write_sweep_csv(rows, out_dir / "sweep.csv"))
        if report.ground is not None:
            written.append(write_solution_csv(report.ground, out_dir / "solution.csv"))
        if report.instanton_rows:
            written.append(write_instanton_csv(report.instanton_rows, out_dir / "instanton.csv"))
        if report.probe is not None and report.probe.rows:
            written.append(write_probe_csv(report.probe, out_dir / "probe.csv"))
        if report.eigen_refinement:
            written.append(write_csv(report.eigen_refinement, ["M", "lambda1", "relative_error", "error_ratio"],
                                     out_dir / "eigen.csv"))
    if "md" in cfg.formats:
        path = out_dir / "report.md"
        try:
            path.write_text(render_report(report, cfg, rows))
        except OSError as e:
            raise OutputError(f"could not write {path}: {e}")
        written.append(path)
    written.append(write_run_meta(cfg, out_dir / "run_meta.json"))
    logger.info(f"Outputs written to {os.fspath(out_dir)}: {', '.join(p.name for p in written)}")
    return written
