"""Exception types shared across the package."""


class ScarlabError(Exception):
    """Base class for all package errors."""


class OverflowGuardFailure(ScarlabError, ArithmeticError):
    """A stabilized closed form still left the floating-point range."""


class GridTooCoarse(ScarlabError):
    """An interpolation error estimate exceeded the requested tolerance."""


class ToleranceNotMet(ScarlabError):
    """Adaptive quadrature exhausted its panel budget before converging."""

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class BallBudgetExceeded(ScarlabError):
    """Group-ball enumeration produced more elements than the configured cap."""


class InvalidGap(ScarlabError, ValueError):
    """Eigenvalue gap outside the admissible window for dilution."""


class ConfigError(ScarlabError):
    """Base class for configuration problems (CLI exit code 2)."""


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ConfigError, ValueError):
    """A configuration value violates a documented invariant."""
