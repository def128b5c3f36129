"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument breaks an operation's precondition (shape, range, overlap)."""


class UnsupportedSize(ValueError):
    """The requested problem is outside the sizes a dense routine will handle."""


class ParameterRange(ValueError):
    """A noise parameter would make Kraus weights negative or complex."""
