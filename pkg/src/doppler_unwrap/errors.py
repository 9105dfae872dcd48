"""Exception types raised across the package."""


class DopplerUnwrapError(Exception):
    """Base class for package-specific errors."""


class InfeasibleAnchorError(DopplerUnwrapError, ValueError):
    """No anchor TDOA can satisfy the unambiguity condition (3*sigma >= pi)."""


class DegenerateSampleError(DopplerUnwrapError, ArithmeticError):
    """A synthesized channel sample has zero magnitude, so its phase is undefined."""


class InfeasibleWindowError(DopplerUnwrapError, RuntimeError):
    """No TOA selection satisfying the window constraints was found."""


class TraceParseError(DopplerUnwrapError, ValueError):
    """A trace file line could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InsufficientTraceError(DopplerUnwrapError, ValueError):
    """A trace holds fewer than two distinct timestamps."""


class ProblemTooLargeError(DopplerUnwrapError, ValueError):
    """A solver enumeration would exceed its hard size guard."""
