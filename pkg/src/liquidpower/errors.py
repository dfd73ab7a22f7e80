"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a precondition (unknown voter, bad range, ...)."""


class ResourceLimitError(RuntimeError):
    """Exhaustive enumeration was requested for a game above the cap.

    Callers should fall back to the Monte Carlo estimators.
    """


class DegenerateInputError(ValueError):
    """The input admits no meaningful fit (e.g. all samples identical)."""


class SeparationError(ValueError):
    """Logistic fit received observations of a single class only."""


class DataFormatError(ValueError):
    """A dataset file failed to parse or violated referential integrity."""

    def __init__(self, message: str, file: str | None = None, row: int | None = None):
        self.file = file
        self.row = row
        where = ""
        if file is not None:
            where = f" [{file}" + (f":{row}" if row is not None else "") + "]"
        super().__init__(message + where)
