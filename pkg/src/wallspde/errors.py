"""Exception types shared across the package.

Each solver raises the most specific class that applies; the CLI maps
ConfigurationError/DomainError to usage exits and everything else to
runtime-failure exits.
"""


class WallspdeError(Exception):
    """Base class for all package errors."""


class ConfigurationError(WallspdeError, ValueError):
    """Invalid configuration: bad sizes, inadmissible parameters, unknown names."""


class DomainError(WallspdeError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SingularityError(WallspdeError, ArithmeticError):
    """Exact singular drift evaluated at or past a wall with no regularization."""


class DivergenceError(WallspdeError, RuntimeError):
    """A time stepper left the overflow guard; retry with a smaller dt."""


class ResolutionError(WallspdeError, ValueError):
    """Requested study needs a finer grid than the one supplied."""
