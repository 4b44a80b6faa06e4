"""Exception and warning types shared across the package."""


class DualTrapError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DualTrapError):
    """Invalid configuration file or parameter set."""


class ConvergenceError(DualTrapError):
    """An iterative numerical procedure failed to converge."""


class BracketError(DualTrapError):
    """A root/threshold search found no sign change in its window."""


class SingularityError(DualTrapError):
    """Two particles approached within the hard-core radius."""


class StepSizeError(DualTrapError):
    """Integrator step too coarse for the fastest active drive."""


class InsufficientDataError(DualTrapError):
    """A record is too short for the requested analysis."""


class SaddlePointError(ConvergenceError):
    """Stationary point found but it is not a local minimum."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class UnstableSystemError(DualTrapError):
    """Steady state requested for a linearly unstable system."""


class SingularResponseError(DualTrapError):
    """Response function evaluated exactly at an undamped resonance."""


class PseudopotentialValidityWarning(UserWarning):
    """q parameter outside the trusted range of the pseudopotential picture."""


class DegenerateModeWarning(UserWarning):
    """Two normal-mode eigenfrequencies are nearly identical."""
