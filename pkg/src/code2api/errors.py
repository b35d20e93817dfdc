"""Shared exception hierarchy for the code2api pipeline."""

from __future__ import annotations


class Code2ApiError(Exception):
    """Base class for every error raised by this package."""


# --- corpus / ingest ---------------------------------------------------------


class IngestError(Code2ApiError):
    """The data dump could not be read at all (bad path, broken XML)."""


class NoCodeSnippet(Code2ApiError):
    """An answer body contains no code region."""


# --- prompt building ---------------------------------------------------------


class UnsupportedLanguage(Code2ApiError):
    """Language is not one of the supported targets."""


class BankFormatError(Code2ApiError):
    """A few-shot bank record is malformed.

    `field` names the offending field so callers can report precisely.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class OverBudget(Code2ApiError):
    """A rendered prompt exceeds the token budget."""

    def __init__(self, estimate: int, budget: int):
        super().__init__(
            f"prompt estimate {estimate} tokens exceeds budget {budget}"
        )
        self.estimate = estimate
        self.budget = budget


# --- LLM backend -------------------------------------------------------------


class BackendError(Code2ApiError):
    """Base class for completion-backend failures."""


class OverTokenLimit(BackendError):
    """Request would exceed the model token limit."""


class TransportError(BackendError):
    """Network-level failure talking to the backend."""


class RateLimited(BackendError):
    """Backend asked us to slow down."""

    def __init__(self, message: str = "rate limited", retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class AuthFailure(BackendError):
    """Credentials missing or rejected; never retried."""


class NotFound(BackendError):
    """Mock backend has no fixture for the requested item."""


# --- structured extraction / parsing -----------------------------------------


class MissingCompleteCode(Code2ApiError):
    """Raw model output has no recognizable complete-code section."""


class Unparseable(Code2ApiError):
    """Generated source could not be parsed into an API signature."""


class NoMethodFound(Code2ApiError):
    """Source parsed, but no method or function declaration was found."""


class UnbalancedBraces(Code2ApiError):
    """A method body opens more braces than it closes."""


# --- compile checking ---------------------------------------------------------


class ToolchainMissing(Code2ApiError):
    """The configured compiler command is not on PATH."""


class CompileTimeout(Code2ApiError):
    """The compiler did not finish within the configured timeout."""


class WorkspaceError(Code2ApiError):
    """Scratch workspace could not be created or cleaned up."""
