"""Exception hierarchy shared by all modules."""


class GenreBayesError(Exception):
    """Base class for every error raised by this package."""


class ParseError(GenreBayesError, ValueError):
    """A malformed input line. Carries the 1-based line number."""

    def __init__(self, message, line=None, source=None):
        self.message = message
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class DatasetValidationError(GenreBayesError, ValueError):
    """Input parsed cleanly but violates a structural rule (duplicates, no genre)."""


class TrainingError(GenreBayesError, ValueError):
    pass


class ContractError(GenreBayesError, ValueError):
    """A caller broke an operation's precondition."""
