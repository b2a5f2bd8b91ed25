"""Shared exception types."""


class PageSchemaError(ValueError):
    """Raised when an input JSON document violates the page or ground-truth schema."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path or "/"
        super().__init__(f"{self.path}: {message}")


class HtmlParseError(ValueError):
    """Raised when an HTML table fragment cannot be parsed into a grid."""

    def __init__(self, message: str, row: int = 0) -> None:
        self.row = row
        super().__init__(f"row {row}: {message}")


class InternalInvariantError(RuntimeError):
    """A structural invariant the library promises to maintain was broken."""
