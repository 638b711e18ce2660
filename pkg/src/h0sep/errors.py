"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so library code raises the
most specific class that applies.
"""


class H0SepError(ValueError):
    """Base class for invalid-input errors raised by this package."""


class SnapshotFormatError(H0SepError):
    """A snapshot, label file or manifest could not be parsed."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class MissingLabelsError(H0SepError):
    """A supervised computation was requested on unlabeled data."""


class ShapeMismatchError(H0SepError):
    """Snapshots that must share N and d do not."""
