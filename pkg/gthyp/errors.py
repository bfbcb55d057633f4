"""Exception hierarchy shared by the library and the CLI."""


class GroupTestingError(Exception):
    """Base class for every error raised by gthyp."""

    kind = "GroupTestingError"


class InputError(GroupTestingError, ValueError):
    kind = "InputError"


class ParseError(InputError):
    """Malformed matrix or config text. `line` is 1-based."""

    kind = "ParseError"

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}:"
        super().__init__(f"{where} {message}" if where else message)


class ResourceError(GroupTestingError):
    kind = "ResourceError"


class DomainError(GroupTestingError, ValueError):
    kind = "DomainError"


class ConvergenceError(GroupTestingError):
    """A bracket had no sign change. `diagnostics` holds the endpoint values."""

    kind = "ConvergenceError"

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)
