"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid or inconsistent input data: bad files, shape mismatches, empty sets."""


class PgmError(DataError):
    """Malformed PGM file. Carries the byte offset where parsing failed, if known."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericError(RuntimeError):
    """Numerical failure, e.g. divergence during network training."""
