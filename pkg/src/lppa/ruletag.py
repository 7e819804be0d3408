"""Rule-based PHI tagger: regular-expression patterns plus lookup dictionaries.

The bundled ruleset targets the format-driven categories (phones, emails,
URLs, ZIPs, timestamps, ids, age cues) with regexes and covers the lexical
categories (names, cities, professions, organizations) with word-boundary
dictionary lookup. It is a reconstruction of the classic scrubber approach,
deliberately small and user-extensible.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .entities import TYPE_ORDER, NoteRecord, PhiDictionary
from .errors import PatternCompileError, SchemaError

logger = logging.getLogger(__name__)

# Dictionary hits rank below every regex pattern; regexes encode stronger,
# format-specific evidence.
DICTIONARY_PRIORITY = 0


@dataclass(frozen=True)
class CompiledPattern:
    entity_type: str
    priority: int
    regex: re.Pattern
    source: str

    @property
    def has_group(self) -> bool:
        return self.regex.groups >= 1


@dataclass(frozen=True)
class Ruleset:
    """Immutable compiled ruleset: regex patterns plus per-type dictionaries."""

    patterns: tuple[CompiledPattern, ...] = ()
    dictionaries: dict[str, tuple[str, ...]] = field(default_factory=dict)
    _dict_patterns: tuple[CompiledPattern, ...] = ()

    def pattern_types(self) -> set[str]:
        return {p.entity_type for p in self.patterns}

    def covered_types(self) -> set[str]:
        return self.pattern_types() | set(self.dictionaries)


def _compile_dictionary(entity_type: str, terms: tuple[str, ...]) -> CompiledPattern:
    # Longest alternative first so "New York" beats "York"; lookarounds give
    # word boundaries that also work for terms starting/ending in digits.
    alternation = "|".join(re.escape(t) for t in sorted(terms, key=len, reverse=True))
    regex = re.compile(
        rf"(?<![A-Za-z0-9])(?:{alternation})(?![A-Za-z0-9])", re.IGNORECASE
    )
    return CompiledPattern(entity_type, DICTIONARY_PRIORITY, regex, f"<dictionary:{entity_type}>")


def load_ruleset(pattern_file: str | Path, dictionary_dir: str | Path | None = None) -> Ruleset:
    """Load and compile a ruleset.

    Pattern file: one rule per line, ``TYPE<TAB>priority<TAB>expression``;
    '#' starts a comment line. Dictionary dir: one ``<type>.txt`` per entity
    type, one term per line, '#' comments. Priorities must be unique across
    the whole file so overlap resolution never depends on file order.
    """
    pattern_file = Path(pattern_file)
    patterns: list[CompiledPattern] = []
    seen_priorities: dict[int, str] = {}
    for lineno, raw in enumerate(pattern_file.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        where = f"{pattern_file}:{lineno}"
        parts = line.split("\t", 2)
        if len(parts) != 3:
            raise PatternCompileError(f"{where}: expected TYPE<TAB>priority<TAB>expression")
        type_name, priority_text, expression = parts
        if type_name not in TYPE_ORDER:
            raise PatternCompileError(f"{where}: unknown entity type {type_name!r}")
        try:
            priority = int(priority_text)
        except ValueError:
            raise PatternCompileError(f"{where}: priority {priority_text!r} is not an integer") from None
        if priority <= DICTIONARY_PRIORITY:
            raise PatternCompileError(f"{where}: priority must be > {DICTIONARY_PRIORITY}")
        if priority in seen_priorities:
            raise PatternCompileError(
                f"{where}: priority {priority} already used at {seen_priorities[priority]}"
            )
        seen_priorities[priority] = where
        try:
            regex = re.compile(expression)
        except re.error as exc:
            raise PatternCompileError(f"{where}: {exc}") from None
        if regex.groups > 1:
            raise PatternCompileError(f"{where}: at most one capture group is supported")
        patterns.append(CompiledPattern(type_name, priority, regex, where))

    dictionaries: dict[str, tuple[str, ...]] = {}
    if dictionary_dir is not None:
        for term_file in sorted(Path(dictionary_dir).glob("*.txt")):
            type_name = term_file.stem.upper()
            if type_name not in TYPE_ORDER:
                raise SchemaError(f"{term_file}: filename does not map to an entity type")
            terms = tuple(
                dict.fromkeys(  # de-dup, keep order
                    line.strip()
                    for line in term_file.read_text(encoding="utf-8").splitlines()
                    if line.strip() and not line.lstrip().startswith("#")
                )
            )
            if terms:
                dictionaries[type_name] = terms

    dict_patterns = tuple(_compile_dictionary(t, terms) for t, terms in dictionaries.items())
    logger.info(
        "loaded %d patterns and %d dictionary terms (%d types)",
        len(patterns),
        sum(len(v) for v in dictionaries.values()),
        len({p.entity_type for p in patterns} | set(dictionaries)),
    )
    return Ruleset(tuple(patterns), dictionaries, dict_patterns)


def _candidates(text: str, rules: Ruleset):
    for pattern in (*rules.patterns, *rules._dict_patterns):
        for match in pattern.regex.finditer(text):
            group = 1 if pattern.has_group else 0
            start, end = match.span(group)
            if start == end:
                continue
            yield (pattern.priority, start, end, pattern.entity_type)


def tag_note(note: NoteRecord | str, rules: Ruleset) -> PhiDictionary:
    """Tag one note; overlaps resolved by priority, then length, then position."""
    text = note.text if isinstance(note, NoteRecord) else note
    ranked = sorted(
        _candidates(text, rules),
        key=lambda c: (-c[0], -(c[2] - c[1]), c[1], TYPE_ORDER[c[3]]),
    )
    claimed: list[tuple[int, int]] = []
    accepted: list[tuple[int, int, str]] = []
    for _, start, end, entity_type in ranked:
        if any(start < c_end and c_start < end for c_start, c_end in claimed):
            continue
        claimed.append((start, end))
        accepted.append((start, end, entity_type))

    # Adjacent PERSON hits separated by one space collapse into a full name:
    # the dictionaries list first names and surnames separately, but the
    # mention of record is "Isla Wilson", not two fragments.
    merged: list[tuple[int, int, str]] = []
    for start, end, entity_type in sorted(accepted):
        if (
            merged
            and entity_type == "PERSON"
            and merged[-1][2] == "PERSON"
            and text[merged[-1][1] : start] == " "
        ):
            merged[-1] = (merged[-1][0], end, "PERSON")
        else:
            merged.append((start, end, entity_type))

    by_type: dict[str, list[str]] = {}
    for start, end, entity_type in merged:
        by_type.setdefault(entity_type, []).append(text[start:end])
    return PhiDictionary(by_type)


def tag_corpus(notes: list[NoteRecord], rules: Ruleset) -> list[tuple[str, PhiDictionary]]:
    """Tag every note, pairing each id with its predictions."""
    return [(note.id, tag_note(note, rules)) for note in notes]


def default_ruleset() -> Ruleset:
    """Load the ruleset bundled with the package."""
    root = resources.files("lppa") / "assets" / "rules"
    with resources.as_file(root) as base:
        return load_ruleset(base / "patterns.tsv", base / "dicts")
