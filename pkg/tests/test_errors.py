import pytest

from shearband import errors


def test_exit_codes():
    assert errors.ValidationError.exit_code == 2
    assert errors.NumericalError.exit_code == 3
    assert errors.IoError.exit_code == 2
    for cls in (errors.ConstraintViolation, errors.Overdetermined, errors.DomainError, errors.DegenerateLambda,
                errors.ResolutionError, errors.StabilityViolation):
        assert issubclass(cls, errors.ValidationError) and issubclass(cls, ValueError)
    for cls in (errors.ComplexSpectrum, errors.StepUnderflow, errors.BudgetExceeded, errors.NonFinite,
                errors.EventNotFound, errors.NoConnection, errors.SelectionFailed, errors.FitIllConditioned,
                errors.ExtrapolationError, errors.PositivityLoss):
        assert issubclass(cls, errors.NumericalError) and cls.exit_code == 3


def test_catchable_as_builtin():
    with pytest.raises(ValueError):
        raise errors.ConstraintViolation("x")
    with pytest.raises(OSError):
        raise errors.IoError("x")
