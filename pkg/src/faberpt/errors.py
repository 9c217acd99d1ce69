"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: input errors -> 2, data inconsistency -> 3,
numerical failures -> 4.
"""


class FaberPTError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 4


class InputError(FaberPTError, ValueError):
    exit_code = 2


class DomainError(InputError):
    """Point lies outside the region where an evaluation is defined."""


class GeometryError(InputError):
    """Curve is not simple, not positively oriented, or degenerate."""

    def __init__(self, message, crossing=None):
        super().__init__(message)
        self.crossing = crossing


class ContrastError(InputError):
    """Conductivity / lambda outside the admissible range."""


class UnsupportedContrastError(ContrastError):
    """Contrast is admissible in general but not for this operation."""


class AssemblyError(FaberPTError):
    """Boundary operator could not be assembled (e.g. coincident nodes)."""


class ResolutionError(FaberPTError):
    """Internal truncation too small for the requested order."""


class CompatibilityError(FaberPTError):
    """Right-hand side violates the solvability condition of a singular system."""

    exit_code = 3

    def __init__(self, message, residual_mean=None):
        super().__init__(message)
        self.residual_mean = residual_mean


class DataInconsistencyError(FaberPTError):
    """Tensor data cannot come from any admissible inclusion."""

    exit_code = 3


class ResonanceError(FaberPTError):
    """A matrix that should be invertible for |lambda| >= 1/2 is singular."""


class InitializationError(FaberPTError):
    """No usable initial guess for the descent."""
