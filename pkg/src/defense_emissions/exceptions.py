"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class DefenseEmissionsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DefenseEmissionsError, ValueError):
    """A configuration or scenario file could not be parsed."""


class ValidationError(DefenseEmissionsError, ValueError):
    """Input data violates a documented invariant."""


class DegenerateRegressorError(ValidationError):
    """A regression design is rank deficient or a regressor has no variation."""


class ConvergenceError(DefenseEmissionsError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""
