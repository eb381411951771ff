"""Exception hierarchy shared by all modules."""


class GmasError(Exception):
    """Base class for errors raised by gmas_stab."""


class NetworkSyntaxError(GmasError):
    """Malformed network text. Carries 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class NetworkValidationError(GmasError):
    """Structurally invalid network (self-loop, duplicate edge, ...)."""


class PreconditionError(GmasError):
    """An operation was called outside its domain."""


class ResourceLimitError(GmasError):
    """A configured enumeration cap was exceeded."""


class NumericalError(GmasError):
    """A numerical routine failed to converge or to verify its result."""


class StiffnessError(NumericalError):
    """The explicit integrator could not continue; the partial trajectory is attached."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class LatticeViolationError(GmasError):
    """Two certified verdicts contradict a known implication between notions."""


class ConsistencyError(GmasError):
    """Two analyses reached conclusions that cannot both be true."""
