"""Exception types raised by the library."""


class FinrangeError(ValueError):
    """Base class for all library errors."""


class NoSolutionError(FinrangeError):
    """An indifference curve leaves the admissible money range."""


class NotDiagonalError(FinrangeError):
    """Two bundles are not strictly ordered in both coordinates."""


class OutOfIntervalError(FinrangeError):
    """A parameter falls outside the declared preference interval."""


class RichnessError(OutOfIntervalError):
    """No preference in the restricted interval is indifferent between two bundles."""


class DegenerateCornerError(FinrangeError):
    """The bundle touches an axis, so its lower box is degenerate."""


class NotMonotoneError(FinrangeError):
    """The payment rule is not monotone in the preference parameter."""


class OrderViolationError(FinrangeError):
    """Indifference thresholds do not interleave with the partition boundaries."""


class VerificationError(FinrangeError):
    """A mechanism failed a required strategy-proofness or rationality check."""
