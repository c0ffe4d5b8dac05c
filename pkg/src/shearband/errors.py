"""Exception hierarchy.

Two families: ``ValidationError`` for bad inputs (CLI exit code 2) and
``NumericalError`` for failures of a computation on valid inputs (exit code 3).
"""

from __future__ import annotations


class ShearBandError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ValidationError(ShearBandError, ValueError):
    exit_code = 2


class NumericalError(ShearBandError, RuntimeError):
    exit_code = 3


# -- validation ---------------------------------------------------------------


class ConstraintViolation(ValidationError):
    """A model parameter violates one of the admissibility inequalities."""


class Overdetermined(ValidationError):
    """Redundant parameters were supplied and they disagree."""


class DomainError(ValidationError):
    """Argument outside the domain of a closed-form expression."""


class DegenerateLambda(ValidationError):
    """lambda sits on the bifurcation value where M3 is not isolated."""


class ResolutionError(ValidationError):
    """Grid too coarse for the requested mode."""


class StabilityViolation(ValidationError):
    """Explicit time step exceeds the diffusion stability bound."""


# -- numerical ----------------------------------------------------------------


class ComplexSpectrum(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class BudgetExceeded(NumericalError):
    pass


class NonFinite(NumericalError):
    pass


class EventNotFound(NumericalError):
    pass


class NoConnection(NumericalError):
    """No shooting seed reached the neighbourhood of the source equilibrium."""


class SelectionFailed(NumericalError):
    pass


class FitIllConditioned(NumericalError):
    pass


class ExtrapolationError(NumericalError):
    pass


class PositivityLoss(NumericalError):
    pass


class IoError(ShearBandError, OSError):
    """Output could not be written (unwritable directory, full disk)."""

    exit_code = 2
