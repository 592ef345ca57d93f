"""Exception hierarchy shared by the library and the command line."""


class ProbwebError(Exception):
    """Base class for all errors raised by probweb."""


class DomainError(ProbwebError, ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(ProbwebError):
    """A dense table or an exhaustive search would exceed its configured cap."""


class ValidationError(ProbwebError, ValueError):
    """A probability system violates normalization or shape invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(ProbwebError):
    """Malformed system or joint file."""

    def __init__(self, message, line, column):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class PreconditionError(ProbwebError):
    """An operation's structural precondition does not hold."""


class InconsistentSystemError(ProbwebError):
    """No joint distribution satisfies the probability system."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"probability system is inconsistent "
                         f"(min max-residual {report.max_residual:.3g})")


class ConvergenceError(ProbwebError):
    """The iterative solver exhausted its budget."""

    def __init__(self, message, last_iterate=None, residual=None, iterations=None):
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)
