"""Change-point detection and structure learning for time-varying Ising models."""

from .errors import DataIOError, InvalidInputError, SolverError, TvisingError
from .estimator import fit_model
from .metrics import evaluate, hausdorff, temporal_f1
from .sampler import generate_scenario
from .selection import search

__version__ = "0.1.0"

__all__ = [
    "DataIOError",
    "InvalidInputError",
    "SolverError",
    "TvisingError",
    "evaluate",
    "fit_model",
    "generate_scenario",
    "hausdorff",
    "search",
    "temporal_f1",
]
