"""Two-phase solutions of the forward-backward heat equation with a
piecewise-linear law: boundary-integral fluxes, the interface Abel equation,
reconstruction and admissibility checks."""

from .errors import (ConfigurationError, DataError, DomainError, NumericalBreakdown, PhaseExitError,
                     PreconditionError, SingularSystemError, StructuralError, TwoPhaseError,
                     ValidationError)
from .phase_model import MonotoneFunction, PhaseLaw, branch_inverse, entropy_F, entropy_G, phi

__version__ = "0.1.0"
