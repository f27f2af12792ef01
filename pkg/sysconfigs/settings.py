import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


def get_output_dir(default: str) -> str:
    return os.getenv('SPSOLVE_OUT_DIR') or default


def get_worker_count(default: int) -> int:
    value = os.getenv('SPSOLVE_WORKERS')
    if not value:
        return default
    try:
        return max(1, int(value))
    except ValueError:
        return default


def get_log_level(default: str) -> str:
    return (os.getenv('SPSOLVE_LOG_LEVEL') or default).upper()


def get_env_overrides() -> dict:
    """Environment values that take precedence over CONFIG defaults"""
    overrides: dict = {}
    out_dir: Optional[str] = os.getenv('SPSOLVE_OUT_DIR')
    if out_dir:
        overrides['out_dir'] = out_dir
    if os.getenv('SPSOLVE_WORKERS'):
        overrides['workers'] = get_worker_count(1)
    return overrides
