"""Exception types shared across the package."""

from __future__ import annotations


class MlsacError(Exception):
    """Base class for all package errors. ``code`` is a stable,
    machine-parseable identifier used by the CLI and service."""

    code = "ERROR"


class ParseError(MlsacError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class IntegrityError(MlsacError):
    code = "INTEGRITY_ERROR"


class UnknownFragment(MlsacError):
    code = "UNKNOWN_FRAGMENT"


class UnknownPhase(MlsacError):
    code = "UNKNOWN_PHASE"


class EmptySelection(MlsacError):
    code = "EMPTY_SELECTION"


class TailoringError(MlsacError):
    """Base for action application failures."""


class UnknownTarget(TailoringError):
    code = "UNKNOWN_TARGET"


class KindMismatch(TailoringError):
    code = "KIND_MISMATCH"


class DuplicateId(TailoringError):
    code = "DUPLICATE_ID"


class ReplayError(TailoringError):
    """Wraps the failing action's error with its index in the script."""

    code = "REPLAY_ERROR"

    def __init__(self, index: int, cause: TailoringError):
        self.index = index
        self.cause = cause
        self.code = cause.code
        super().__init__(f"action {index}: {cause}")


class NotFound(MlsacError):
    code = "NOT_FOUND"


class StorageError(MlsacError):
    code = "STORAGE_ERROR"


class VersionMismatch(MlsacError):
    code = "VERSION_MISMATCH"
