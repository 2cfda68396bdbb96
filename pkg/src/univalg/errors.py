"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class UAError(Exception):
    """Base class for every error raised by univalg."""


class InputError(UAError):
    """Malformed user input: bad JSON, unknown names, width mismatches."""


class TermParseError(InputError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class SignatureMismatch(UAError):
    pass


class NotAHomomorphism(UAError):
    pass


class CapExceeded(UAError):
    """A configured resource cap was hit; ``found`` is how far the work got."""

    def __init__(self, message: str, found: int | None = None):
        super().__init__(message)
        self.found = found


class LimitExceeded(UAError):
    """More results exist than the caller's ``limit`` allows."""

    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = partial or []


class NotCongruenceDistributive(UAError):
    pass
