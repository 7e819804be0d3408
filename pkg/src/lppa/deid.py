"""De-identification: replace every PHI mention with its entity-type label.

Replacement is a pure text transformation driven by the note's PhiDictionary.
Longer mentions claim their spans first so that "John Doe" governs any
overlap with "John"; word boundaries protect short numeric mentions (AGE
"45" must not corrupt a lab value "450"). Mentions the policy cannot locate
are reported as residuals, and verify_clean audits those as raw substrings —
a boundary-blocked leak is still a leak.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .entities import TYPE_ORDER, PhiDictionary

_ALNUM = re.compile(r"[A-Za-z0-9]")


@dataclass(frozen=True)
class DeidPolicy:
    """How mentions are located and what replaces them."""

    label_format: str = "[{TYPE}]"
    case_insensitive: bool = True
    word_boundary: bool = True

    def __post_init__(self) -> None:
        if self.label_format.count("{TYPE}") != 1:
            raise ValueError("label_format must contain the {TYPE} placeholder exactly once")

    def label(self, entity_type: str) -> str:
        return self.label_format.replace("{TYPE}", entity_type)

    def mention_pattern(self, mention: str) -> re.Pattern:
        """Compile the finder for one mention.

        Boundaries are applied per side, only where the mention edge is a
        letter/digit: "45" gets both guards, "male," keeps the left guard so
        "female," cannot be torn apart mid-word.
        """
        body = re.escape(mention)
        if self.word_boundary:
            if _ALNUM.match(mention[0]):
                body = r"(?<![A-Za-z0-9])" + body
            if _ALNUM.match(mention[-1]):
                body = body + r"(?![A-Za-z0-9])"
        return re.compile(body, re.IGNORECASE if self.case_insensitive else 0)


DEFAULT_DEID_POLICY = DeidPolicy()


@dataclass(frozen=True)
class Replacement:
    original: str
    entity_type: str
    start: int
    end: int


@dataclass(frozen=True)
class DeidentifiedNote:
    """Result of de-identifying one note.

    Replacement offsets refer to the ORIGINAL text, sorted and
    non-overlapping. residuals lists (entity_type, mention) pairs the policy
    found nowhere in the original text.
    """

    text: str
    replacements: tuple[Replacement, ...] = ()
    residuals: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        last_end = -1
        for r in self.replacements:
            if r.start < last_end:
                raise ValueError("replacements must be sorted and non-overlapping")
            last_end = r.end


def _match_order(phi: PhiDictionary) -> list[tuple[str, str]]:
    # Unique (type, mention) pairs; longest mention first, then category
    # order, then lexicographic as the final deterministic tiebreak.
    unique = {(t, m) for t, mentions in phi.items() for m in mentions}
    return sorted(unique, key=lambda tm: (-len(tm[1]), TYPE_ORDER[tm[0]], tm[1]))


def deidentify(
    text: str, phi: PhiDictionary, policy: DeidPolicy = DEFAULT_DEID_POLICY
) -> DeidentifiedNote:
    """Replace every located occurrence of every mention with its type label."""
    claimed: list[tuple[int, int, str]] = []
    residuals: list[tuple[str, str]] = []
    for entity_type, mention in _match_order(phi):
        finder = policy.mention_pattern(mention)
        found = False
        for match in finder.finditer(text):
            start, end = match.span()
            found = True
            if any(start < c_end and c_start < end for c_start, c_end, _ in claimed):
                continue  # governed by a longer mention's span
            claimed.append((start, end, entity_type))
        if not found:
            residuals.append((entity_type, mention))

    claimed.sort()
    pieces: list[str] = []
    replacements: list[Replacement] = []
    cursor = 0
    for start, end, entity_type in claimed:
        pieces.append(text[cursor:start])
        pieces.append(policy.label(entity_type))
        replacements.append(Replacement(text[start:end], entity_type, start, end))
        cursor = end
    pieces.append(text[cursor:])
    residuals.sort(key=lambda tm: (TYPE_ORDER[tm[0]], tm[1]))
    return DeidentifiedNote("".join(pieces), tuple(replacements), tuple(residuals))


def verify_clean(
    deid: DeidentifiedNote, phi: PhiDictionary, policy: DeidPolicy = DEFAULT_DEID_POLICY
) -> list[tuple[str, int]]:
    """Audit a de-identified note; [] means no mention survives.

    Replaced mentions are re-scanned under the policy that produced the note.
    Residual mentions are additionally scanned as raw substrings: if the
    word-boundary rule was what stopped replacement, the characters are still
    on the page and must be reported.
    """
    residual_set = set(deid.residuals)
    findings: list[tuple[str, int]] = []
    seen: set[tuple[str, int]] = set()
    for entity_type, mention in _match_order(phi):
        finder = policy.mention_pattern(mention)
        for match in finder.finditer(deid.text):
            key = (mention, match.start())
            if key not in seen:
                seen.add(key)
                findings.append(key)
        if (entity_type, mention) in residual_set:
            raw = re.compile(
                re.escape(mention), re.IGNORECASE if policy.case_insensitive else 0
            )
            for match in raw.finditer(deid.text):
                key = (mention, match.start())
                if key not in seen:
                    seen.add(key)
                    findings.append(key)
    findings.sort(key=lambda f: (f[1], f[0]))
    return findings
