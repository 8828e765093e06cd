"""Exception hierarchy shared by every module."""


class ErrorBoundError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(ErrorBoundError, ValueError):
    pass


class AllInfinite(ErrorBoundError):
    """The objective is +inf on every probed point of the search interval."""


class NoBracket(ErrorBoundError):
    pass


class NonConvergence(ErrorBoundError):
    pass


class NumericalDefect(ErrorBoundError):
    """An iteration that must converge did not; indicates a bug, not bad input."""


class Unsupported(ErrorBoundError):
    pass


class EmptySet(ErrorBoundError):
    pass


class TooLarge(ErrorBoundError):
    pass


class TooHighDimension(ErrorBoundError):
    pass


class EmptyGrid(ErrorBoundError):
    pass


class NoSlaterCertificate(ErrorBoundError):
    pass


class InvalidDelta(ErrorBoundError):
    pass


class ZeroMargin(ErrorBoundError):
    pass


class InfiniteDiameter(ErrorBoundError):
    pass


class InvalidSpec(ErrorBoundError, ValueError):
    """A function, cone or set specification violates its construction invariants."""


class ParseError(ErrorBoundError):
    pass
