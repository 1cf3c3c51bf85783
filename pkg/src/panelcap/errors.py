"""Exception types shared across the package."""

from __future__ import annotations


class PanelcapError(Exception):
    """Base class for all package errors."""


class EndpointError(PanelcapError):
    """A remote endpoint call failed for good (retries exhausted or 4xx)."""

    def __init__(self, message: str, attempts: int = 1, status: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.status = status


class ProtocolError(PanelcapError):
    """The endpoint answered, but the body does not match the wire contract."""


class EmptyOutputError(PanelcapError):
    """The model returned an empty completion."""


class EmptyTokensError(PanelcapError):
    """A metric was asked to score an empty token-embedding list."""


class EmbeddingError(PanelcapError):
    """Embedding provider failure, annotated with the attribute context."""


class ParseError(PanelcapError):
    """A structured block (csv) yielded no usable rows."""


class UnparseableOutputError(PanelcapError):
    """Neither a caption nor attributes could be recovered from model output."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class SchemaError(PanelcapError):
    """An input file violates its schema; message names the offending path."""


class CheckpointError(PanelcapError):
    """The checkpoint file is unreadable or inconsistent."""
