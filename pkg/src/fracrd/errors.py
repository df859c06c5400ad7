"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FracRDError(Exception):
    """Base class for every error raised by :mod:`fracrd`."""


class InvalidParams(FracRDError, ValueError):
    """A parameter lies outside its admissible domain."""


class IllPosed(InvalidParams):
    """The problem statement is inconsistent (e.g. missing second datum)."""


class NumericalFailure(FracRDError, ArithmeticError):
    """Base class for failures of a numerical method."""


class NonConvergent(NumericalFailure):
    pass


class OracleFailure(NumericalFailure):
    pass


class QuadratureFailure(NumericalFailure):
    pass


class InsufficientSamples(NumericalFailure):
    pass


class PoleCollision(NumericalFailure):
    """Two contributing poles of a Mellin-Barnes integrand coincide."""


class GridTooCoarse(NumericalFailure):
    """The spectral multiplier is not resolved by the spatial grid."""
