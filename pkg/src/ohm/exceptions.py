"""Exception hierarchy shared by every module."""


class OhmError(Exception):
    """Base class for all errors raised by this package."""


class GraphError(OhmError, ValueError):
    """Invalid graph data (exit code 2 on the command line)."""


class DuplicateEdge(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class Disconnected(GraphError):
    pass


class SourceEqualsSink(GraphError):
    pass


class IdOutOfRange(GraphError):
    pass


class GraphSyntaxError(GraphError):
    """Malformed edge-list text; ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class SingularSystem(OhmError):
    pass


class DegenerateSpectrum(OhmError):
    pass


class ParameterOutOfRange(OhmError, ValueError):
    pass


class InvalidParams(OhmError, ValueError):
    pass


class ConnectivityRetryExhausted(OhmError):
    pass


class TooLargeForExact(OhmError, ValueError):
    pass


class TokenOverflow(OhmError, OverflowError):
    pass


class BoundViolation(OhmError, AssertionError):
    """A proven inequality failed numerically; always an implementation bug."""
