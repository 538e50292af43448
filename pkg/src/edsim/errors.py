class EdsError(Exception):
    """Base class for simulator errors."""


class ConfigError(EdsError, ValueError):
    """Invalid or inconsistent configuration."""


class UnreachableThresholdError(EdsError, ValueError):
    """Requested strain threshold needs a comparator voltage above V_EXT."""


class UndefinedServiceLifeError(EdsError, ZeroDivisionError):
    """Average current is zero, so battery life is unbounded."""


class OutputError(EdsError, OSError):
    """Writing simulation outputs failed."""
