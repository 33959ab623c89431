"""Exception hierarchy for the AirComp power-control library.

Invalid-argument style errors subclass ValueError so callers that only
catch ValueError keep working.

Model validation is the exception: SystemConfig and ExperimentConfig run
their checks inside pydantic validators, so a rejected configuration
surfaces as pydantic.ValidationError (itself a ValueError) carrying the
InvalidArgumentError message, never as InvalidArgumentError. Catch
ValueError, or ValidationError, around model construction. The config
loader turns it into ConfigError.
"""


class AirCompError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(AirCompError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateChannelError(InvalidArgumentError):
    """A zero channel gain where channel inversion is required."""


class UnboundedDualError(InvalidArgumentError):
    """The per-state inner problem has no finite minimizer at this price vector."""


class UnsupportedOperationError(AirCompError):
    """The operation is not defined for these inputs (e.g. infinite denoising factor)."""


class InternalConsistencyError(AirCompError):
    """A structural property guaranteed by the solver was violated."""


class ConfigError(AirCompError, ValueError):
    """Invalid experiment configuration."""
