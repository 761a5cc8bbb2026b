"""Exception and warning types raised across the package."""


class SwarmLimitsError(Exception):
    """Base class for all errors raised by swarmlimits."""


class SingularEvaluation(SwarmLimitsError, ValueError):
    """A singular kernel was evaluated at zero separation.

    Callers must exclude the diagonal (coincident points) from pair sums.
    """


class NonPositiveDensity(SwarmLimitsError, ValueError):
    pass


class QuadratureFailure(SwarmLimitsError, RuntimeError):
    pass


class CharacteristicCrossing(SwarmLimitsError, RuntimeError):
    """Lagrangian nodes changed order: the classical solution has broken down."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NoConvergence(SwarmLimitsError, RuntimeError):
    pass


class MassMismatch(SwarmLimitsError, ValueError):
    pass


class NonPositiveValue(SwarmLimitsError, ValueError):
    pass


class ConfigError(SwarmLimitsError, ValueError):
    pass


class StiffnessWarning(UserWarning):
    """Explicit integration step is likely unstable for the inertia scale."""
