"""
Solver Errors
=============

Exception types shared by the radial solver modules and the command-line runner.

HOW TO USE:
Raise the most specific class; the runner maps them to exit codes
(configuration 2, convergence 3, output 4).
"""

from typing import Any, Optional


class SolverError(Exception):
    """Base class for every error raised by the solver"""


class ConfigurationError(SolverError, ValueError):
    """Invalid grid, parameters, flags or config file values"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class InvalidFieldError(SolverError, ValueError):
    """Nodal values that break the RadialField invariants"""


class GridMismatchError(SolverError, ValueError):
    """Two fields that should share a grid do not"""


class UnsupportedExponentError(SolverError, ValueError):
    """lp_mass called with an exponent outside {2, 5, 6}"""


class DegenerateFieldError(SolverError, ValueError):
    """Operation undefined for the zero field"""


class NoFiberMaxError(SolverError):
    """t -> I(tu) has no positive maximum because a - lambda*b <= 0"""

    def __init__(self, a_minus_lambda_b: float, message: Optional[str] = None):
        self.a_minus_lambda_b = a_minus_lambda_b
        super().__init__(
            message
            or f"no fibering maximum: a - lambda*b = {a_minus_lambda_b:.6e} <= 0 "
               f"(lambda >= lambda_1 along this direction)"
        )


class ResolutionError(SolverError, ValueError):
    """Instanton parameter below what the grid can resolve"""

    def __init__(self, eps: float, eps_min: float):
        self.eps = eps
        self.eps_min = eps_min
        super().__init__(f"eps = {eps:.6e} is below the minimum resolvable eps = {eps_min:.6e}")


class ConvergenceError(SolverError):
    """Iteration cap reached without meeting the tolerance"""

    def __init__(self, message: str, last_iterate: Any = None, diagnostics: Optional[dict] = None):
        self.last_iterate = last_iterate
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class OutputError(SolverError, OSError):
    """Output directory missing or not writable"""
