"""Exception hierarchy for the finetune adapter."""

from __future__ import annotations


class FinetuneError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FinetuneError):
    """A configuration value or file is invalid."""


class SchemaError(FinetuneError):
    """A dataset line does not match the chat-format contract.

    Carries the 1-based line number so callers can point at the offending
    record.
    """

    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(message)
        self.lineno = lineno


class NoAccelerator(FinetuneError):
    """A real training run was requested on a machine without a GPU."""


class OutOfMemory(FinetuneError):
    """Training ran out of accelerator memory.

    The resolved training plan is attached so the failure report shows what
    was attempted.
    """

    def __init__(self, message: str, plan: dict | None = None):
        super().__init__(message)
        self.plan = plan
