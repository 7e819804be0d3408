"""Exception types shared across the toolkit."""

from __future__ import annotations


class LppaError(Exception):
    """Base class for every toolkit-raised error."""


class ParseError(LppaError, ValueError):
    """Text could not be parsed into the expected structure."""


class SchemaError(LppaError, ValueError):
    """Parsed structure violates the PHI dictionary or corpus schema."""


class MissingMarker(ParseError):
    """A generation reply lacks the 'PHI:' marker."""


class PatternCompileError(LppaError, ValueError):
    """A ruleset line failed to load; the message names the offending line."""


class TransportError(LppaError, RuntimeError):
    """Network, HTTP-status, or wire-format failure talking to an endpoint."""


class ExhaustedRetries(LppaError, RuntimeError):
    """All retry attempts failed. Keeps the last raw reply for auditing."""

    def __init__(self, message: str, last_reply: str | None = None):
        super().__init__(message)
        self.last_reply = last_reply


class MissingGold(LppaError, ValueError):
    """A training-export record has no gold annotations."""


class EmptyPool(LppaError, ValueError):
    """An identity pool required for simulation is empty."""


class EmptyCorpus(LppaError, ValueError):
    """An operation that needs notes or tokens received none."""


class TooFewNotes(LppaError, ValueError):
    """Self-BLEU needs at least two notes."""


class EmptyOntology(LppaError, ValueError):
    """The plausibility ontology has no terms."""


class LengthMismatch(LppaError, ValueError):
    """Paired samples have different lengths."""


class TooFewPairs(LppaError, ValueError):
    """A paired t-test needs at least two pairs."""


class UnknownBaseline(LppaError, ValueError):
    """The requested baseline name is not among the reports."""


class ConfigError(LppaError, ValueError):
    """Invalid application configuration."""
