"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the model."""


class SingularityError(DomainError):
    """A receiver coincides with a jammer (or two nodes coincide)."""


class ConvergenceError(RuntimeError):
    """A numerical solver did not converge within its iteration budget."""


class InstanceFormatError(ValueError):
    """An instance or config file could not be parsed."""


class PathOverflowError(RuntimeError):
    """Path enumeration exceeded its configured budget."""


class LPError(RuntimeError):
    """The simplex solver failed (unbounded problem or iteration cap)."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)
