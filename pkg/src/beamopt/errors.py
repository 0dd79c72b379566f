"""Exception types shared across the package."""


class BeamOptError(Exception):
    """Base class for all package-specific errors."""


class DegenerateElementError(BeamOptError):
    """Element jacobian vanished (or went negative) at a quadrature point."""


class NonConvergenceError(BeamOptError):
    """Newton iteration exhausted its budget without meeting the tolerance."""

    def __init__(self, message: str, last_residual: float):
        super().__init__(f"{message} (last residual norm {last_residual:.3e})")
        self.last_residual = last_residual


class SingularTangentError(BeamOptError):
    """Tangent (or moment) matrix could not be factorized."""


class SpecError(BeamOptError):
    """Experiment configuration is malformed or inconsistent."""
