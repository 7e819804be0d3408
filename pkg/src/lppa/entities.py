"""Canonical domain types: entity schema, PHI dictionaries, notes, normalization.

The twelve entity types and their order come from the annotation prompt and are
fixed: every serialization in the toolkit emits keys in that order so that
golden files, training exports, and diffs stay stable.
"""

from __future__ import annotations

import json
import logging
import re
import string
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import ParseError, SchemaError

logger = logging.getLogger(__name__)

ENTITY_TYPES: tuple[str, ...] = (
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

TYPE_ORDER: dict[str, int] = {name: i for i, name in enumerate(ENTITY_TYPES)}

SOURCES: tuple[str, ...] = ("real", "aeg", "spi", "unknown")


class PhiDictionary:
    """Per-note map from entity type to extracted mention strings.

    Lists keep duplicates: the same string extracted twice counts twice
    (multiset semantics). Keys are restricted to ENTITY_TYPES, empty lists are
    dropped, and iteration always follows canonical type order, so two
    dictionaries compare equal exactly when they hold the same multisets.
    Instances are immutable.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[str, Iterable[str]] | None = None):
        staged: dict[str, tuple[str, ...]] = {}
        for key, values in (entries or {}).items():
            if key not in TYPE_ORDER:
                raise SchemaError(f"unknown entity type {key!r}")
            if not isinstance(values, (list, tuple)):
                raise SchemaError(f"{key}: value must be a list of strings")
            mentions = tuple(values)
            for mention in mentions:
                if not isinstance(mention, str):
                    raise SchemaError(f"{key}: mention {mention!r} is not a string")
                if not mention.strip():
                    raise SchemaError(f"{key}: blank mention")
            if mentions:
                staged[key] = mentions
        object.__setattr__(
            self, "_entries", {k: staged[k] for k in ENTITY_TYPES if k in staged}
        )

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("PhiDictionary is immutable")

    def mentions(self, entity_type: str) -> tuple[str, ...]:
        if entity_type not in TYPE_ORDER:
            raise SchemaError(f"unknown entity type {entity_type!r}")
        return self._entries.get(entity_type, ())

    def types(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def items(self) -> Iterator[tuple[str, tuple[str, ...]]]:
        return iter(self._entries.items())

    def total(self) -> int:
        return sum(len(v) for v in self._entries.values())

    def as_dict(self) -> dict[str, list[str]]:
        """Plain-data view in canonical key order (for JSON embedding)."""
        return {k: list(v) for k, v in self._entries.items()}

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhiDictionary):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __repr__(self) -> str:
        return f"PhiDictionary({self._entries!r})"


def _first_balanced_block(text: str) -> str | None:
    """Return the first {...} block whose braces balance, or None.

    Quotes are honoured so braces inside JSON strings do not count.
    """
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start : i + 1]
        start = text.find("{", start + 1)
    return None


def _coerce_scalar(value: object) -> str | None:
    # bool is an int subclass; reject it before the numeric branch
    if isinstance(value, bool):
        return None
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return str(value)
    return None


def parse_phi_dictionary(text: str, strict: bool = False) -> PhiDictionary:
    """Parse a model reply (or stored JSON) into a PhiDictionary.

    Strict mode accepts only one top-level JSON object whose keys are known
    entity types and whose values are lists of non-blank strings. Lenient mode
    applies an ordered repair ladder on top of that: (a) extract the first
    balanced {...} block from surrounding prose, (b) drop unknown keys with a
    warning, (c) wrap bare scalar values into one-element lists, (d) coerce
    numeric values to strings. Blank or unusable mentions are dropped with a
    warning rather than failing the note.
    """
    if strict:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ParseError("top-level JSON value is not an object")
        return PhiDictionary(data)

    block = _first_balanced_block(text)
    if block is None:
        raise ParseError("no balanced {...} object found")
    try:
        data = json.loads(block)
    except json.JSONDecodeError as exc:
        raise ParseError(f"candidate object is not valid JSON: {exc}") from None

    repaired: dict[str, list[str]] = {}
    for key, value in data.items():
        if key not in TYPE_ORDER:
            logger.warning("dropping unknown PHI key %r", key)
            continue
        if not isinstance(value, list):
            scalar = _coerce_scalar(value)
            if scalar is None:
                logger.warning("dropping %s: unusable value %r", key, value)
                continue
            value = [scalar]
        mentions: list[str] = []
        for item in value:
            scalar = _coerce_scalar(item)
            if scalar is None:
                logger.warning("dropping %s mention %r", key, item)
                continue
            if not scalar.strip():
                logger.warning("dropping blank %s mention", key)
                continue
            mentions.append(scalar)
        if mentions:
            repaired[key] = mentions
    return PhiDictionary(repaired)


def serialize_phi_dictionary(d: PhiDictionary) -> str:
    """Canonical serialization: prompt-order keys, no insignificant whitespace."""
    return json.dumps(d.as_dict(), ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class NormalizationPolicy:
    """Which transforms mention matching applies (see normalize_mention)."""

    case_fold: bool = True
    collapse_whitespace: bool = True
    strip_edge_punctuation: bool = True


DEFAULT_NORMALIZATION = NormalizationPolicy()

_WHITESPACE_RUN = re.compile(r"\s+")
# Whitespace is included so stripping edge punctuation cannot leave
# a dangling space (keeps normalization idempotent).
_EDGE_CHARS = string.punctuation + string.whitespace


def normalize_mention(s: str, policy: NormalizationPolicy = DEFAULT_NORMALIZATION) -> str:
    """Normalize a mention for matching.

    Fixed transform order: trim, collapse internal whitespace runs to one
    space, case-fold, strip leading/trailing punctuation. Trimming always
    happens; the rest follow the policy flags. Idempotent under any policy.
    """
    out = s.strip()
    if policy.collapse_whitespace:
        out = _WHITESPACE_RUN.sub(" ", out)
    if policy.case_fold:
        out = out.casefold()
    if policy.strip_edge_punctuation:
        out = out.strip(_EDGE_CHARS)
    return out


@dataclass(frozen=True)
class NoteRecord:
    """One clinical note with optional gold annotations and provenance."""

    id: str
    text: str
    phi: PhiDictionary | None = None
    source: str = "unknown"

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("note id must be non-empty")
        if not self.text:
            raise ValueError(f"note {self.id!r}: text must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"note {self.id!r}: unknown source {self.source!r}")


def load_corpus(path) -> list[NoteRecord]:
    """Read a notes.jsonl corpus; ids must be unique within the file."""
    records: list[NoteRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise ParseError(f"{path}:{lineno}: line is not an object")
            try:
                note_id = obj["id"]
                text = obj["text"]
            except KeyError as exc:
                raise SchemaError(f"{path}:{lineno}: missing field {exc}") from None
            phi_obj = obj.get("phi")
            phi = None if phi_obj is None else PhiDictionary(phi_obj)
            source = obj.get("source") or "unknown"
            record = NoteRecord(id=note_id, text=text, phi=phi, source=source)
            if record.id in seen:
                raise SchemaError(f"{path}:{lineno}: duplicate note id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    return records


def save_corpus(records: Iterable[NoteRecord], path) -> int:
    """Write a notes.jsonl corpus; returns the number of lines written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            obj = {
                "id": record.id,
                "text": record.text,
                "phi": record.phi.as_dict() if record.phi is not None else None,
                "source": record.source,
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
            n += 1
    return n
