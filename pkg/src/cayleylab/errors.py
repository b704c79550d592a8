"""Exception hierarchy shared by every cayleylab module."""


class CayleyLabError(Exception):
    """Base class for all library errors."""


class ValidationError(CayleyLabError, ValueError):
    """Malformed input: bad element, bad generating set, out-of-range parameter."""


class ParseError(ValidationError):
    """Group-spec syntax error; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class SizeLimitError(CayleyLabError):
    """A ball or series would exceed the configured vertex cap."""

    def __init__(self, message: str, radius: int | None = None):
        self.radius = radius
        super().__init__(message)


class InvariantError(CayleyLabError, AssertionError):
    """An internal invariant failed. Always a bug."""
