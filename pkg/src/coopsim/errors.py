"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class EmptyGraphError(InvalidArgumentError):
    """An operation that needs at least one vertex got an empty graph."""


class IllegalStateError(RuntimeError):
    """An operation was called on a state that cannot support it."""


class UnsupportedTopologyError(TypeError):
    """An operation that needs a geometric graph got a different topology."""


class EnumerationBoundError(InvalidArgumentError):
    """An exact enumeration would exceed its hard size limit."""


class ExplosionError(RuntimeError):
    """A branching step would require sampling an infeasible number of terms."""


class ConfigError(InvalidArgumentError):
    """An experiment configuration file or value is invalid."""


class InvariantViolationError(AssertionError):
    """An internal consistency check failed."""
