"""Exception hierarchy shared by every module."""

from __future__ import annotations


class KlscError(Exception):
    """Base class for all library errors."""

    #: CLI exit status when this error reaches the top level
    exit_code = 1


class ValidationError(KlscError):
    """Input was well-formed code-wise but mathematically rejected."""

    exit_code = 2


class ExpressionSyntaxError(ValidationError):
    """Malformed expression text. ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownIdentifier(ExpressionSyntaxError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class DomainError(ValidationError):
    """Evaluation left the real domain or the annulus."""


class DegenerateMetric(ValidationError):
    """A metric component is not positive where it is needed."""


class NotKahler(ValidationError):
    pass


class NotAdmissible(ValidationError):
    pass


class NonPositiveConformalFactor(ValidationError):
    pass


class MultipleZeros(ValidationError):
    pass


class NotSmoothAtZero(ValidationError):
    pass


class InexactCoefficient(ValidationError):
    """A series coefficient is not a rational number (for example it involves pi)."""


class AllCoefficientsZero(ValidationError):
    pass


class TruncationInsufficient(KlscError):
    pass


class DivergentIntegral(KlscError):
    pass


class ToleranceNotMet(KlscError):
    pass
