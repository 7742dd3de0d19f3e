"""Exception hierarchy shared by all modules."""


class EntangleError(Exception):
    """Base class for every error raised by this package."""


class InvalidState(EntangleError):
    """A state, shape or density matrix violates its invariants."""


class ZeroState(InvalidState):
    pass


class SizeLimit(InvalidState):
    pass


class DimensionMismatch(InvalidState):
    pass


class EmptySubset(EntangleError):
    pass


class TrivialSubset(EntangleError):
    pass


class NumericalError(EntangleError):
    """Base for failures of the floating point machinery."""


class EigenFailure(NumericalError):
    pass


class NotSeparable(NumericalError):
    """The requested block is not a pure tensor factor of the state."""


class NumericalAmbiguity(NumericalError):
    """A separability decision depends on the chosen rank tolerance."""

    def __init__(self, message, subset=None, ratio=None):
        super().__init__(message)
        self.subset = subset
        self.ratio = ratio


class ParseError(EntangleError):
    """Input text could not be turned into a state."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class KetSyntaxError(ParseError):
    def __init__(self, message, line, column, expected=()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message} (expected {', '.join(self.expected)})"
        super().__init__(message, line, column)


class ArityMismatch(ParseError):
    pass


class BadHeader(ParseError):
    pass


class BadRow(ParseError):
    pass


class IndexOutOfRange(ParseError):
    pass


class DuplicateEntry(ParseError):
    pass
