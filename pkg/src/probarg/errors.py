"""Exception hierarchy shared by all probarg modules."""


class ProbArgError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(ProbArgError):
    """Malformed input: bad dimensions, invalid values, broken invariants."""


class UnknownArgumentError(StructuralError):
    """An argument name was used that the framework does not declare."""


class UnsatisfiableError(ProbArgError):
    """An operation required a satisfiable constraint set and got an unsatisfiable one."""


class ConditionInconsistentError(UnsatisfiableError):
    """Conditioning constraints are incompatible with the given constraint set."""


class LimitExceededError(ProbArgError):
    """A brute-force operation was refused because the instance is too large."""


class SolverError(ProbArgError):
    """The numerical solver failed to produce a usable answer."""


class ParseError(ProbArgError):
    """A problem file could not be parsed; message carries a line number."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
