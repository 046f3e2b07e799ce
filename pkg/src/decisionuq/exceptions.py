"""Exception hierarchy shared across the package."""


class DecisionUQError(Exception):
    """Base class for every error raised by decisionuq."""


class ConfigError(DecisionUQError, ValueError):
    """Invalid study configuration or input file."""


class NumericalError(DecisionUQError, ArithmeticError):
    """A numerical procedure failed (divergence, degenerate weights, ...)."""


class ImproperDistributionError(DecisionUQError, ValueError):
    """Raised when a density-like operation is requested on an improper prior marker."""
