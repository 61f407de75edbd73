"""Exception hierarchy.

Validation problems map to CLI exit code 2, numerical failures to 3.
"""

from __future__ import annotations


class StripError(Exception):
    exit_code = 1


class ValidationError(StripError, ValueError):
    exit_code = 2

    def __init__(self, message: str, *, field: str | None = None):
        super().__init__(message)
        self.field = field
        self.errors: list[ValidationError] = [self]


class NonPositiveParameter(ValidationError):
    pass


class BoundaryViolation(ValidationError):
    pass


class EmptyData(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class NegativeTime(ValidationError):
    pass


class WrongRegime(ValidationError):
    pass


class InvalidAlpha(ValidationError):
    pass


class InvalidExponents(ValidationError):
    pass


class UnstableParameters(ValidationError):
    pass


class NumericalError(StripError, ArithmeticError):
    exit_code = 3


class TruncationFailure(NumericalError):
    def __init__(self, message: str, *, achieved_bound: float, truncation=None):
        super().__init__(message)
        self.achieved_bound = achieved_bound
        self.truncation = truncation


class QuadratureFailure(NumericalError):
    def __init__(self, message: str, *, error_estimate: float):
        super().__init__(message)
        self.error_estimate = error_estimate


class StiffnessFailure(NumericalError):
    pass


class SamplingTooCoarse(NumericalError):
    pass
