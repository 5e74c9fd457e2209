"""Exception hierarchy shared by every module."""


class GeomRegError(Exception):
    """Base class for all errors raised by geomreg."""


class ShapeError(GeomRegError, ValueError):
    """Operand dimensions do not conform."""


class DomainError(GeomRegError, ValueError):
    """An argument lies outside the domain of the operation."""


class DecompositionError(GeomRegError, ArithmeticError):
    """The singular value decomposition routine did not converge."""


class NoRootError(GeomRegError, ValueError):
    """A parameter equation has no root in the admissible range."""

    def __init__(self, message, lower=None, upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class ConvergenceError(GeomRegError, ArithmeticError):
    """An iteration stopped at ``max_iter`` without meeting its tolerance.

    The last iterate and its step residual are kept on the exception so that
    callers can inspect or resume from them.
    """

    def __init__(self, message, last_iterate=None, residual=None, iterations=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations


class SingularPointError(GeomRegError, ValueError):
    """A derivative was requested where the function is not differentiable."""


class NotApplicableError(GeomRegError, ValueError):
    """A check cannot be carried out for this instance (e.g. empty kept set)."""


class ConsistencyError(GeomRegError, AssertionError):
    """An internal identity that must hold to rounding accuracy was violated."""


class StageError(GeomRegError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the original error."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
