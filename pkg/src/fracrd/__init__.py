"""Space-time fractional reaction-diffusion: Mittag-Leffler multipliers, Fox H-function
Green's functions and a spectral solver on a periodic grid."""

from __future__ import annotations

from .errors import (
    FracRDError,
    GridTooCoarse,
    IllPosed,
    InsufficientSamples,
    InvalidParams,
    NonConvergent,
    NumericalFailure,
    OracleFailure,
    PoleCollision,
    QuadratureFailure,
)
from .greens import DensityProfile, SpatialGrid, fundamental_solution, green_spectral
from .hfunction import HFunctionSpec, h_eval, parse_spec
from .mittag_leffler import MLParams, mittag_leffler, ml_eval
from .riesz_feller import RieszFellerParams, TemporalParams, symbol
from .solver import DiffusionProblem, SolutionField, residual_check, solve, solve_convolution

__version__ = "0.1.0"

__all__ = [
    "DensityProfile",
    "DiffusionProblem",
    "FracRDError",
    "GridTooCoarse",
    "HFunctionSpec",
    "IllPosed",
    "InsufficientSamples",
    "InvalidParams",
    "MLParams",
    "NonConvergent",
    "NumericalFailure",
    "OracleFailure",
    "PoleCollision",
    "QuadratureFailure",
    "RieszFellerParams",
    "SolutionField",
    "SpatialGrid",
    "TemporalParams",
    "fundamental_solution",
    "green_spectral",
    "h_eval",
    "mittag_leffler",
    "ml_eval",
    "parse_spec",
    "residual_check",
    "solve",
    "solve_convolution",
    "symbol",
    "__version__",
]
