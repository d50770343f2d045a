"""Exception hierarchy shared by every module in the package."""


class CiuError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CiuError, ValueError):
    """A declaration or input violates its contract.

    Raised for invalid feature spaces, contexts, concept trees, scenario
    files, label scales, and engine arguments. The message always names the
    offending component.
    """


class ProbeBudgetError(ValidationError):
    """A grid request would materialize more probes than the configured cap."""


class ModelError(CiuError, RuntimeError):
    """A predictor misbehaved: arity mismatch, non-finite output, or a
    transport failure while talking to an external adapter."""


class InternalError(CiuError, RuntimeError):
    """An internal invariant was broken. Indicates a bug, not a user error."""
