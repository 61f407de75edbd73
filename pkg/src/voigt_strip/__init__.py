"""Damped strip problem for the linear Voigt model: modal solver, Green's function and bound checks."""

__version__ = "0.1.0"

from .errors import NumericalError, StripError, ValidationError  # noqa: E402
from .model import Grid, Problem, SineSeriesFn, StripConfig, TimeProfile, load_problem  # noqa: E402

__all__ = [
    "Grid",
    "NumericalError",
    "Problem",
    "SineSeriesFn",
    "StripConfig",
    "StripError",
    "TimeProfile",
    "ValidationError",
    "load_problem",
    "__version__",
]
