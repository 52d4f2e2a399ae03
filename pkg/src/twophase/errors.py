"""Exception hierarchy shared by all stages."""

from __future__ import annotations


class TwoPhaseError(Exception):
    """Base class; ``stage`` names the pipeline stage that raised."""

    stage = "generic"


class DomainError(TwoPhaseError, ValueError):
    stage = "domain"


class ValidationError(TwoPhaseError, ValueError):
    stage = "validation"


class DataError(TwoPhaseError, ValueError):
    stage = "data"


class ConfigurationError(TwoPhaseError, ValueError):
    stage = "config"


class NumericalBreakdown(TwoPhaseError, ArithmeticError):
    stage = "numerics"


class SingularSystemError(TwoPhaseError, ArithmeticError):
    """Collocation matrix too ill-conditioned to solve without regularization."""

    stage = "solve"

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class PhaseExitError(TwoPhaseError, ValueError):
    """The trace left the open interval (A, B)."""

    stage = "reconstruct"

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class StructuralError(TwoPhaseError, ValueError):
    stage = "verify"


class PreconditionError(TwoPhaseError, ValueError):
    stage = "verify"
