"""Bures-Hall ensemble toolkit: closed-form entropy averages, special
functions, quadrature oracles, the one-point density and Monte Carlo
samplers."""

__version__ = "0.1.0"

from .closed_form import (  # noqa: F401
    Dims,
    EnsembleParams,
    avg_purity_bures,
    avg_purity_general,
    avg_vn_bures,
    avg_vn_general,
    induced_purity_mean,
    induced_vn_mean,
)
from .errors import BuresError, ConvergenceError, DomainError, ParameterError  # noqa: F401
