"""Loewner-Kufarev chains, their entropy, and HL(0) aggregation experiments."""

__version__ = "0.1.0"

from .conformal import ComposedSlitMap, SlitParams, compose_eval, slit_capacity, slit_map_eval
from .errors import (
    DomainError,
    InfeasibleError,
    InternalError,
    InvalidInputError,
    LklabError,
    NumericError,
)
from .hl0 import simulate_hl0, simulate_hl0_poisson
from .lk_solver import becker_check, solve_map, trace_hull

__all__ = [
    "__version__",
    "ComposedSlitMap",
    "SlitParams",
    "compose_eval",
    "slit_capacity",
    "slit_map_eval",
    "DomainError",
    "InfeasibleError",
    "InternalError",
    "InvalidInputError",
    "LklabError",
    "NumericError",
    "simulate_hl0",
    "simulate_hl0_poisson",
    "becker_check",
    "solve_map",
    "trace_hull",
]
