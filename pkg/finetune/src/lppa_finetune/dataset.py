"""Chat-format training-set validation.

The dataset contract is the upstream export format: one JSON object per line,
`{"messages": [system, user, assistant]}`, where the assistant turn is a JSON
object mapping PHI entity types to lists of mention strings. This module
checks that contract without importing the exporter — the JSONL file IS the
interface between the two packages.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError

# Exchange-format entity inventory, fixed by the export contract.
ENTITY_TYPES = (
    "PERSON",
    "LOCATION",
    "ORGANIZATION",
    "AGE",
    "PHONE_NUMBER",
    "EMAIL",
    "DATE_TIME",
    "ZIP",
    "PROFESSION",
    "USERNAME",
    "ID",
    "URL",
)

ROLES = ("system", "user", "assistant")

HISTOGRAM_BIN = 128  # token-length buckets: [0,128), [128,256), ...


def estimate_tokens(text: str) -> int:
    """Conservative length estimate: one token per four characters."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class DatasetStats:
    n_records: int
    token_histogram: dict[int, int] = field(default_factory=dict)
    n_over_seq_len: int = 0

    def as_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "token_histogram": {str(k): v for k, v in sorted(self.token_histogram.items())},
            "n_over_seq_len": self.n_over_seq_len,
        }


def _check_assistant(content: str, lineno: int) -> None:
    try:
        phi = json.loads(content)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"line {lineno}: assistant content is not valid JSON: {exc}", lineno
        ) from exc
    if not isinstance(phi, dict):
        raise SchemaError(
            f"line {lineno}: assistant content must be a JSON object", lineno
        )
    for entity_type, mentions in phi.items():
        if entity_type not in ENTITY_TYPES:
            raise SchemaError(
                f"line {lineno}: unknown entity type {entity_type!r}", lineno
            )
        if not isinstance(mentions, list) or not all(
            isinstance(m, str) and m for m in mentions
        ):
            raise SchemaError(
                f"line {lineno}: {entity_type} mentions must be non-empty strings",
                lineno,
            )


def _check_messages(payload, lineno: int) -> int:
    """Validate one record; returns its estimated token length."""
    if not isinstance(payload, dict) or set(payload) != {"messages"}:
        raise SchemaError(
            f"line {lineno}: record must be an object with a single 'messages' key",
            lineno,
        )
    messages = payload["messages"]
    if not isinstance(messages, list) or len(messages) != len(ROLES):
        raise SchemaError(
            f"line {lineno}: expected exactly {len(ROLES)} messages", lineno
        )
    total_chars = 0
    for expected_role, message in zip(ROLES, messages):
        if not isinstance(message, dict) or set(message) != {"role", "content"}:
            raise SchemaError(
                f"line {lineno}: each message needs exactly 'role' and 'content'",
                lineno,
            )
        if message["role"] != expected_role:
            raise SchemaError(
                f"line {lineno}: expected role {expected_role!r}, "
                f"got {message['role']!r}",
                lineno,
            )
        if not isinstance(message["content"], str) or not message["content"]:
            raise SchemaError(
                f"line {lineno}: {expected_role} content must be a non-empty string",
                lineno,
            )
        total_chars += len(message["content"])
    _check_assistant(messages[2]["content"], lineno)
    return math.ceil(total_chars / 4)


def validate_dataset(path: str | Path, seq_len: int = 512) -> DatasetStats:
    """Validate every line; returns counts, a token-length histogram, and
    how many records exceed seq_len."""
    path = Path(path)
    histogram: dict[int, int] = {}
    n_records = 0
    n_over = 0
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                raise SchemaError(f"line {lineno}: blank line", lineno)
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(
                    f"line {lineno}: invalid JSON: {exc}", lineno
                ) from exc
            tokens = _check_messages(payload, lineno)
            bucket = (tokens // HISTOGRAM_BIN) * HISTOGRAM_BIN
            histogram[bucket] = histogram.get(bucket, 0) + 1
            if tokens > seq_len:
                n_over += 1
            n_records += 1
    if n_records == 0:
        warnings.warn(f"{path}: dataset is empty", stacklevel=2)
    return DatasetStats(
        n_records=n_records, token_histogram=histogram, n_over_seq_len=n_over
    )
