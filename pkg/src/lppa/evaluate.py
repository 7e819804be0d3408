"""Entity-level evaluation: per-type and overall P/R/F1 plus paired t-tests.

Matching is normalized exact-string multiset intersection per entity type —
the annotation exchange format carries surface strings without offsets, so
span-based matching is not possible. A note's "overall" triple is micro
across its types; corpus scores are plain arithmetic means over notes, which
keeps results bit-reproducible against a brute-force reimplementation (no
numpy reductions, whose pairwise summation reorders float additions).
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass

from scipy.stats import t as student_t

from .entities import (
    DEFAULT_NORMALIZATION,
    ENTITY_TYPES,
    NormalizationPolicy,
    PhiDictionary,
    normalize_mention,
)
from .errors import EmptyCorpus, LengthMismatch, TooFewPairs, UnknownBaseline

REPORT_GROUPS = ("PERSON", "AGE", "DATE_TIME")  # headline columns beside Overall


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float

    def __post_init__(self) -> None:
        for name, v in (("precision", self.precision), ("recall", self.recall), ("f1", self.f1)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} out of range: {v}")

    @classmethod
    def from_counts(cls, tp: int, n_pred: int, n_gold: int) -> "ScoreTriple":
        if n_pred == 0 and n_gold == 0:
            return cls(1.0, 1.0, 1.0)  # nothing to find, nothing claimed
        p = tp / n_pred if n_pred else 0.0
        r = tp / n_gold if n_gold else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f1)


@dataclass(frozen=True)
class EvalReport:
    per_type: dict[str, ScoreTriple | None]
    overall: ScoreTriple
    per_note_overall_f1: list[float]
    n_notes: int

    def __post_init__(self) -> None:
        if len(self.per_note_overall_f1) != self.n_notes:
            raise ValueError("per-note list must have one entry per note")


@dataclass(frozen=True)
class TTestResult:
    t: float | None
    p: float
    significant: bool
    n_pairs: int


def match_counts(
    gold: PhiDictionary,
    pred: PhiDictionary,
    policy: NormalizationPolicy = DEFAULT_NORMALIZATION,
) -> dict[str, tuple[int, int, int]]:
    """Per-type (tp, n_pred, n_gold); only types present on either side."""
    counts: dict[str, tuple[int, int, int]] = {}
    for entity_type in ENTITY_TYPES:
        gold_norm = Counter(normalize_mention(m, policy) for m in gold.mentions(entity_type))
        pred_norm = Counter(normalize_mention(m, policy) for m in pred.mentions(entity_type))
        if not gold_norm and not pred_norm:
            continue
        tp = sum((gold_norm & pred_norm).values())
        counts[entity_type] = (tp, sum(pred_norm.values()), sum(gold_norm.values()))
    return counts


def score_note(
    gold: PhiDictionary,
    pred: PhiDictionary,
    policy: NormalizationPolicy = DEFAULT_NORMALIZATION,
) -> tuple[dict[str, ScoreTriple], ScoreTriple]:
    """Per-type triples plus the note's overall triple (micro across types)."""
    counts = match_counts(gold, pred, policy)
    per_type = {t: ScoreTriple.from_counts(*c) for t, c in counts.items()}
    overall = ScoreTriple.from_counts(
        sum(c[0] for c in counts.values()),
        sum(c[1] for c in counts.values()),
        sum(c[2] for c in counts.values()),
    )
    return per_type, overall


def score_corpus(
    pairs: list[tuple[PhiDictionary, PhiDictionary]],
    policy: NormalizationPolicy = DEFAULT_NORMALIZATION,
) -> EvalReport:
    """Arithmetic mean over notes; a type never predicted is ABSENT (None)."""
    if not pairs:
        raise EmptyCorpus("cannot score an empty corpus")
    type_triples: dict[str, list[ScoreTriple]] = {t: [] for t in ENTITY_TYPES}
    type_pred_totals: dict[str, int] = {t: 0 for t in ENTITY_TYPES}
    overall_triples: list[ScoreTriple] = []
    for gold, pred in pairs:
        counts = match_counts(gold, pred, policy)
        per_type, overall = score_note(gold, pred, policy)
        overall_triples.append(overall)
        for entity_type, triple in per_type.items():
            type_triples[entity_type].append(triple)
        for entity_type, (_, n_pred, _) in counts.items():
            type_pred_totals[entity_type] += n_pred

    def mean_triple(triples: list[ScoreTriple]) -> ScoreTriple:
        n = len(triples)
        return ScoreTriple(
            sum(x.precision for x in triples) / n,
            sum(x.recall for x in triples) / n,
            sum(x.f1 for x in triples) / n,
        )

    per_type: dict[str, ScoreTriple | None] = {}
    for entity_type in ENTITY_TYPES:
        if type_pred_totals[entity_type] == 0:
            per_type[entity_type] = None  # never predicted corpus-wide
        else:
            per_type[entity_type] = mean_triple(type_triples[entity_type])
    return EvalReport(
        per_type=per_type,
        overall=mean_triple(overall_triples),
        per_note_overall_f1=[x.f1 for x in overall_triples],
        n_notes=len(pairs),
    )


def paired_t_test(a: list[float], b: list[float]) -> TTestResult:
    """Two-tailed paired t-test; df = n − 1."""
    if len(a) != len(b):
        raise LengthMismatch(f"paired samples differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise TooFewPairs("paired t-test needs at least 2 pairs")
    d = [x - y for x, y in zip(a, b)]
    mean_d = statistics.mean(d)
    sd = statistics.stdev(d)
    if sd == 0:
        if mean_d == 0:
            return TTestResult(t=None, p=1.0, significant=False, n_pairs=n)
        return TTestResult(
            t=math.copysign(math.inf, mean_d), p=0.0, significant=True, n_pairs=n
        )
    t = mean_d * math.sqrt(n) / sd
    p = 2.0 * float(student_t.sf(abs(t), n - 1))
    return TTestResult(t=t, p=p, significant=bool(p < 0.05), n_pairs=n)


def report_to_json(report: EvalReport) -> dict:
    """Plain-data report (all 12 types; ABSENT serialized as null)."""

    def triple(x: ScoreTriple | None):
        if x is None:
            return None
        return {"pr": x.precision, "re": x.recall, "f1": x.f1}

    return {
        "per_type": {t: triple(report.per_type.get(t)) for t in ENTITY_TYPES},
        "overall": triple(report.overall),
        "n_notes": report.n_notes,
        "per_note_overall_f1": list(report.per_note_overall_f1),
    }


def render_report(reports: list[tuple[str, EvalReport]], baseline: str | None = None) -> str:
    """Delimited comparison table: Overall plus the headline type groups.

    A '*' on the overall F1 marks significance (p < 0.05) of the paired
    t-test on per-note overall F1 against the baseline row.
    """
    names = [name for name, _ in reports]
    if baseline is None:
        baseline = names[0]
    if baseline not in names:
        raise UnknownBaseline(f"baseline {baseline!r} not among {names}")
    base_report = dict(reports)[baseline]

    def cells(x: ScoreTriple | None, star: bool = False) -> list[str]:
        if x is None:
            return ["/", "/", "/"]
        f1 = f"{x.f1:.2f}*" if star else f"{x.f1:.2f}"
        return [f"{x.precision:.2f}", f"{x.recall:.2f}", f1]

    header = ["Model"]
    for group in ("Overall", *REPORT_GROUPS):
        header += [f"{group} Pr", f"{group} Re", f"{group} F1"]
    lines = [" | ".join(header)]
    for name, report in reports:
        if name == baseline or report.n_notes < 2:
            star = False
        else:
            star = paired_t_test(
                report.per_note_overall_f1, base_report.per_note_overall_f1
            ).significant
        row = [name] + cells(report.overall, star=star)
        for group in REPORT_GROUPS:
            row += cells(report.per_type.get(group))
        lines.append(" | ".join(row))
    return "\n".join(lines)
