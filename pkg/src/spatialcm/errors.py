"""Exception types shared by every spatialcm module."""

from __future__ import annotations


class SCMError(Exception):
    """An operation failed with a stable, machine-readable ``code``.

    Extra keyword arguments are kept in ``details`` (for example the
    offending anchor uuid when a condition cannot be evaluated).
    """

    def __init__(self, code: str, message: str = "", **details):
        self.code = code
        self.message = message or code
        self.details = details
        super().__init__(f"{code}: {self.message}")


class ParseError(SCMError):
    """Malformed text: a document, a condition, or a field expression.

    ``line`` and ``column`` are 1-based; ``offset`` is the 0-based
    character index into the parsed text.
    """

    def __init__(self, message: str, line: int, column: int, offset: int | None = None,
                 code: str = "PARSE_ERROR"):
        self.reason = message
        self.line = line
        self.column = column
        self.offset = offset
        super().__init__(code, f"{message} (line {line}, column {column})",
                         line=line, column=column, offset=offset)

    @classmethod
    def at(cls, message: str, text: str, offset: int, code: str = "PARSE_ERROR") -> "ParseError":
        line = text.count("\n", 0, offset) + 1
        column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        return cls(message, line, column, offset, code=code)
