"""Exception hierarchy shared by all modules."""


class PigeonlabError(Exception):
    pass


class ParameterError(PigeonlabError, ValueError):
    """Bad argument: out-of-range vertex, impossible degree, ..."""


class PreconditionError(PigeonlabError):
    """A documented precondition of an operation does not hold."""


class BudgetError(PigeonlabError):
    """An enumeration or search exceeded its configured budget.

    ``estimate`` carries the amount of work that would have been required
    when it is known.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class RuleError(PigeonlabError):
    """A resolution or weakening step is not a legal application of its rule."""


class ParseError(PigeonlabError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
