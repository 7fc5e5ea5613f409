"""
Exception hierarchy for the photon-Carnot engine toolkit.

Every error raised on purpose derives from PCEError. The command-line front
end maps the three branches to exit codes:

    ConfigError / StateError   -> 2  (bad input)
    PhysicsDomainError         -> 3  (outside the model's regime)
    NumericalError             -> 4  (solver / truncation failure)
"""

from typing import Optional


class PCEError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(PCEError, ValueError):
    """Invalid configuration document or command-line override."""

    exit_code = 2

    def __init__(self, path: Optional[str], message: str):
        self.path = path
        self.message = message
        text = f"{path}: {message}" if path else message
        super().__init__(text)


class StateError(PCEError, ValueError):
    """A field state or atom preparation violates its invariants."""

    exit_code = 2


class PhysicsDomainError(PCEError, ValueError):
    """Parameters fall outside the regime where the model is defined."""

    exit_code = 3


class RunawayGainError(PhysicsDomainError):
    """Injection gain beats absorption plus loss: no finite stationary mean."""


class UnphysicalZetaError(PhysicsDomainError):
    """1 + zeta <= 0, or zeta undefined (mu = 0 with a lossy cavity)."""


class NumericalError(PCEError, RuntimeError):
    """A numerical procedure failed."""

    exit_code = 4


class UnderTruncationError(NumericalError):
    """Population leaked to the top Fock level beyond the tail tolerance."""

    def __init__(self, tail_mass: float, n_max: int, tol: float):
        self.tail_mass = tail_mass
        self.n_max = n_max
        self.tol = tol
        super().__init__(
            f"under-truncated field: population {tail_mass:.3e} at Fock level "
            f"{n_max} exceeds tail tolerance {tol:.1e}"
        )


class IntegrationError(NumericalError):
    """The adaptive integrator could not advance (step-size underflow)."""


class SteadyStateError(NumericalError):
    """No unique stationary state could be determined."""
