"""
Run Configuration
=================

Builds the validated RunConfig for one `spsolve` invocation.

HOW TO USE:
    cfg = parse_config(["ground", "--M", "1024", "--lambda-rel", "0.5"])

CONFIGURATION OPTIONS:
Values are layered, later layers winning:
1. CONFIG defaults (scripts/solver_config.py)
2. Environment: SPSOLVE_OUT_DIR, SPSOLVE_WORKERS (sysconfigs/settings.py, .env supported)
3. JSON config file (--config); keys are the flag names with underscores, "lambda" for an absolute lambda
4. Command-line flags

lambda is given either absolutely (--lambda) or relative to lambda_1
(--lambda-rel); both in the same layer is an error, and a layer naming one
of them replaces whatever a lower layer said about the other.
"""

import argparse
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from scripts import __version__
from scripts.solver_config import COMMANDS, CONFIG, INIT_CHOICES, MIN_INTERIOR_NODES
from scripts.solver_errors import ConfigurationError
from sysconfigs.settings import get_env_overrides

logger = logging.getLogger(__name__)

FILE_KEYS = {
    "R", "M", "q", "lambda", "lambda_rel", "eps_schedule", "grad_tol", "max_iters", "init", "init_file",
    "init_eps", "seed", "workers", "sweep_lambda_rel", "sweep_q", "probe_schedule", "probe_max_iters",
    "continuum_essi", "cross_check", "fit_degree", "out_dir", "formats", "retry_attempts",
}
FORMATS = ("csv", "md")
# Left out of the provenance hash: they do not change any number
UNHASHED_KEYS = ("out_dir", "workers", "log_level")


@dataclass(frozen=True)
class RunConfig:
    command: str
    R: float = CONFIG["R"]
    M: int = CONFIG["M"]
    q: float = CONFIG["q"]
    lambda_rel: Optional[float] = CONFIG["lambda_rel"]
    lambda_abs: Optional[float] = CONFIG["lambda_abs"]
    eps_schedule: List[float] = field(default_factory=lambda: list(CONFIG["eps_schedule"]))
    fit_degree: int = CONFIG["fit_degree"]
    grad_tol: float = CONFIG["grad_tol"]
    max_iters: int = CONFIG["max_iters"]
    init: str = CONFIG["init"]
    init_file: Optional[str] = CONFIG["init_file"]
    init_eps: Optional[float] = CONFIG["init_eps"]
    seed: int = CONFIG["seed"]
    workers: int = CONFIG["workers"]
    retry_attempts: int = CONFIG["retry_attempts"]
    sweep_lambda_rel: List[float] = field(default_factory=lambda: list(CONFIG["sweep_lambda_rel"]))
    sweep_q: List[float] = field(default_factory=lambda: list(CONFIG["sweep_q"]))
    probe_schedule: List[int] = field(default_factory=lambda: list(CONFIG["probe_schedule"]))
    probe_max_iters: int = CONFIG["probe_max_iters"]
    continuum_essi: bool = CONFIG["continuum_essi"]
    cross_check: bool = False
    out_dir: str = CONFIG["out_dir"]
    formats: List[str] = field(default_factory=lambda: list(CONFIG["formats"]))
    log_level: str = CONFIG["log_level"]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ConfigArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigurationError instead of exiting"""

    def error(self, message: str):
        raise ConfigurationError(message, field="argv")


def _float_list(text: str) -> List[float]:
    return [float(item) for item in text.split(",") if item.strip()]


def _int_list(text: str) -> List[int]:
    return [int(item) for item in text.split(",") if item.strip()]


def build_parser() -> ConfigArgumentParser:
    parser = ConfigArgumentParser(
        prog="spsolve",
        description="Radial solver and verification harness for the critical Schrodinger-Poisson system on B_R",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--R", type=float, help="ball radius (default 1)")
    parser.add_argument("--M", type=int, help="number of radial intervals, even (default 1024)")
    parser.add_argument("--q", type=float, help="coupling constant (default 1)")
    parser.add_argument("--lambda", dest="lambda_abs", type=float, help="absolute lambda")
    parser.add_argument("--lambda-rel", dest="lambda_rel", type=float, help="lambda / lambda_1 (default 0.5)")
    parser.add_argument("--eps-schedule", dest="eps_schedule", type=_float_list,
                        help="comma-separated decreasing instanton eps values")
    parser.add_argument("--fit-degree", dest="fit_degree", type=int, help="polynomial degree in sqrt(eps)")
    parser.add_argument("--grad-tol", dest="grad_tol", type=float)
    parser.add_argument("--max-iters", dest="max_iters", type=int)
    parser.add_argument("--init", choices=INIT_CHOICES)
    parser.add_argument("--init-file", dest="init_file", help="solution.csv to start from (init 'file')")
    parser.add_argument("--init-eps", dest="init_eps", type=float, help="instanton eps for init 'instanton'")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument("--config", dest="config_file", help="JSON config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--sweep-lambda-rel", dest="sweep_lambda_rel", type=_float_list)
    parser.add_argument("--sweep-q", dest="sweep_q", type=_float_list)
    parser.add_argument("--probe-schedule", dest="probe_schedule", type=_int_list)
    parser.add_argument("--probe-max-iters", dest="probe_max_iters", type=int)
    parser.add_argument("--continuum-essi", dest="continuum_essi", action="store_const", const=True,
                        help="also check the Poisson bound with the continuum Sobolev constant")
    parser.add_argument("--cross-check", dest="cross_check", action="store_const", const=True,
                        help="ground: repeat the solve from an instanton start and compare levels")
    parser.add_argument("--formats", type=lambda text: [item for item in text.split(",") if item])
    parser.add_argument("--log-level", dest="log_level")
    return parser


def load_config_file(path: str) -> Dict[str, Any]:
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigurationError(f"config file {path} not found", field="config")
    try:
        with open(config_path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config file {path} is not valid JSON: {e}", field="config")
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object", field="config")
    unknown = sorted(set(data) - FILE_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown keys in {path}: {', '.join(unknown)}", field="config")
    if "lambda" in data:
        data["lambda_abs"] = data.pop("lambda")
    return data


def _apply_layer(merged: Dict[str, Any], layer: Dict[str, Any], source: str) -> None:
    has_abs = layer.get("lambda_abs") is not None
    has_rel = layer.get("lambda_rel") is not None
    if has_abs and has_rel:
        raise ConfigurationError(f"{source} gives both an absolute and a relative lambda", field="lambda")
    if has_abs:
        merged["lambda_rel"] = None
    if has_rel:
        merged["lambda_abs"] = None
    merged.update({key: value for key, value in layer.items() if value is not None})


def _finite_list(values: Sequence[float], name: str) -> None:
    if not values:
        raise ConfigurationError("grid is empty", field=name)
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in values):
        raise ConfigurationError(f"grid has non-finite entries: {values}", field=name)


def validate(cfg: RunConfig) -> RunConfig:
    if not (math.isfinite(cfg.R) and cfg.R > 0):
        raise ConfigurationError(f"must be positive, got {cfg.R}", field="R")
    if isinstance(cfg.M, bool) or not isinstance(cfg.M, int) or cfg.M < MIN_INTERIOR_NODES or cfg.M % 2:
        raise ConfigurationError(f"must be even and at least {MIN_INTERIOR_NODES}, got {cfg.M}", field="M")
    if not (math.isfinite(cfg.q) and cfg.q > 0):
        raise ConfigurationError(f"must be positive, got {cfg.q}", field="q")
    if cfg.lambda_abs is None and cfg.lambda_rel is None:
        raise ConfigurationError("neither --lambda nor --lambda-rel is set", field="lambda")
    for name in ("lambda_abs", "lambda_rel", "init_eps"):
        value = getattr(cfg, name)
        if value is not None and not math.isfinite(value):
            raise ConfigurationError(f"must be finite, got {value}", field=name)
    if cfg.grad_tol <= 0 or not math.isfinite(cfg.grad_tol):
        raise ConfigurationError(f"must be positive, got {cfg.grad_tol}", field="grad_tol")
    for name in ("max_iters", "probe_max_iters", "workers", "retry_attempts", "fit_degree"):
        if getattr(cfg, name) < 1:
            raise ConfigurationError(f"must be at least 1, got {getattr(cfg, name)}", field=name)
    if len(cfg.eps_schedule) < 3:
        raise ConfigurationError("need at least 3 eps values", field="eps_schedule")
    _finite_list(cfg.eps_schedule, "eps_schedule")
    if any(b >= a for a, b in zip(cfg.eps_schedule, cfg.eps_schedule[1:])) or cfg.eps_schedule[-1] <= 0:
        raise ConfigurationError("must be positive and strictly decreasing", field="eps_schedule")
    _finite_list(cfg.sweep_lambda_rel, "sweep_lambda_rel")
    _finite_list(cfg.sweep_q, "sweep_q")
    if any(q <= 0 for q in cfg.sweep_q):
        raise ConfigurationError(f"couplings must be positive, got {cfg.sweep_q}", field="sweep_q")
    if not cfg.probe_schedule:
        raise ConfigurationError("grid is empty", field="probe_schedule")
    if any(M < MIN_INTERIOR_NODES or M % 2 for M in cfg.probe_schedule):
        raise ConfigurationError(f"every M must be even and at least {MIN_INTERIOR_NODES}", field="probe_schedule")
    if cfg.init == "file" and not cfg.init_file:
        raise ConfigurationError("init 'file' needs --init-file", field="init_file")
    unknown = sorted(set(cfg.formats) - set(FORMATS))
    if unknown or not cfg.formats:
        raise ConfigurationError(f"formats must be a nonempty subset of {FORMATS}, got {cfg.formats}",
                                 field="formats")
    return cfg


def parse_config(argv: Sequence[str], config_file: Optional[str] = None) -> RunConfig:
    """Parse flags and merge defaults, environment, config file and flags into a validated RunConfig"""
    args = vars(build_parser().parse_args(list(argv)))
    command = args.pop("command")
    config_file = args.pop("config_file") or config_file

    merged: Dict[str, Any] = {}
    _apply_layer(merged, get_env_overrides(), "environment")
    if config_file:
        _apply_layer(merged, load_config_file(config_file), f"config file {config_file}")
    _apply_layer(merged, args, "command line")

    try:
        cfg = RunConfig(command=command, **merged)
    except TypeError as e:
        raise ConfigurationError(str(e), field="config")
    cfg = validate(cfg)
    logger.debug(f"Run configuration: {cfg}")
    return cfg


def resolve_lambda(cfg: RunConfig, lambda1: float) -> float:
    """Absolute lambda; a relative value is multiplied by the discrete lambda_1 of the run grid"""
    if cfg.lambda_abs is not None:
        return cfg.lambda_abs
    return cfg.lambda_rel * lambda1


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the canonical JSON of every setting that affects the numbers"""
    payload = {key: value for key, value in cfg.to_dict().items() if key not in UNHASHED_KEYS}
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def code_version() -> str:
    return __version__
