"""Exception types shared across the toolkit.

DataError (and subclasses) map to CLI exit code 2; anything else is a bug.
"""


class DataError(Exception):
    """Malformed or inconsistent input data."""


class LrcParseError(DataError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class RowError(DataError):
    """Bad row in a TSV annotation file."""

    def __init__(self, row_no: int, message: str):
        super().__init__(f"row {row_no}: {message}")
        self.row_no = row_no


class MissingEmbeddingError(DataError):
    def __init__(self, key: str):
        super().__init__(f"no stored embedding for key {key!r}")
        self.key = key
