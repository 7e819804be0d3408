"""Synthetic-corpus quality metrics: Self-BLEU, perplexity, entropy, plausibility.

The perplexity backend is a deliberately small additive-k n-gram model rather
than a pre-trained transformer: it is deterministic, dependency-free, and
good enough to rank corpora by fluency. Tokens never seen in training share
the smoothed unseen mass of the training vocabulary (the vocabulary is the
set of observed types; no extra unknown slot), which keeps the uniform-model
identity exact: an LM trained on a perfectly uniform unigram corpus assigns
1/V everywhere, so perplexity of any in-vocab text is V.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .entities import NoteRecord
from .errors import EmptyCorpus, EmptyOntology, TooFewNotes

_TOKEN = re.compile(r"\w+|[^\w\s]")
_BLEU_EPS = 1e-9
_START = "<s>"


def _texts(corpus) -> list[str]:
    return [n.text if isinstance(n, NoteRecord) else n for n in corpus]


def tokenize(text: str) -> list[str]:
    """Lowercase word/punctuation tokens; whitespace never survives."""
    return _TOKEN.findall(text.lower())


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _bleu_against(candidate: list[str], references: list[list[str]], max_n: int) -> float:
    log_precisions = []
    for n in range(1, max_n + 1):
        cand = _ngram_counts(candidate, n)
        total = sum(cand.values())
        if total == 0:
            log_precisions.append(math.log(_BLEU_EPS))
            continue
        max_ref: Counter = Counter()
        for ref in references:
            for gram, count in _ngram_counts(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        clipped = sum(min(count, max_ref[gram]) for gram, count in cand.items())
        log_precisions.append(math.log(clipped / total) if clipped else math.log(_BLEU_EPS))
    # Brevity penalty against the closest reference length (ties -> shorter).
    c = len(candidate)
    r = min((abs(len(ref) - c), len(ref)) for ref in references)[1]
    bp = 1.0 if c > r else math.exp(1 - r / c) if c else 0.0
    return bp * math.exp(sum(log_precisions) / max_n)


def self_bleu(corpus, max_n: int = 4) -> float:
    """Mean BLEU of each note against all the others; lower = more diverse."""
    texts = _texts(corpus)
    if len(texts) < 2:
        raise TooFewNotes("self-BLEU needs at least 2 notes")
    token_lists = [tokenize(t) for t in texts]
    scores = []
    for i, candidate in enumerate(token_lists):
        references = token_lists[:i] + token_lists[i + 1 :]
        scores.append(_bleu_against(candidate, references, max_n))
    return sum(scores) / len(scores)


def corpus_entropy(corpus) -> float:
    """Shannon entropy (bits) of the unigram distribution pooled over notes."""
    counts: Counter = Counter()
    for text in _texts(corpus):
        counts.update(tokenize(text))
    total = sum(counts.values())
    if total == 0:
        raise EmptyCorpus("entropy needs at least one token")
    return -sum((c / total) * math.log2(c / total) for c in counts.values())


@dataclass(frozen=True)
class NGramLM:
    order: int
    counts: dict[tuple[str, ...], Counter]
    context_totals: dict[tuple[str, ...], int]
    vocab_size: int
    smoothing_k: float

    def prob(self, context: tuple[str, ...], token: str) -> float:
        ctx_counts = self.counts.get(context)
        c = ctx_counts[token] if ctx_counts else 0
        total = self.context_totals.get(context, 0)
        return (c + self.smoothing_k) / (total + self.smoothing_k * self.vocab_size)


def train_ngram_lm(reference_corpus, order: int = 2, smoothing_k: float = 0.1) -> NGramLM:
    """Additive-k smoothed n-gram model; sequences start-padded, no end marker."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if smoothing_k <= 0:
        raise ValueError("smoothing_k must be > 0")
    counts: dict[tuple[str, ...], Counter] = {}
    context_totals: dict[tuple[str, ...], int] = {}
    vocab: set[str] = set()
    n_tokens = 0
    for text in _texts(reference_corpus):
        tokens = tokenize(text)
        vocab.update(tokens)
        n_tokens += len(tokens)
        padded = [_START] * (order - 1) + tokens
        for i in range(order - 1, len(padded)):
            context = tuple(padded[i - order + 1 : i])
            token = padded[i]
            counts.setdefault(context, Counter())[token] += 1
            context_totals[context] = context_totals.get(context, 0) + 1
    if n_tokens == 0:
        raise EmptyCorpus("cannot train a language model on an empty corpus")
    return NGramLM(order, counts, context_totals, len(vocab), smoothing_k)


def perplexity(corpus, lm: NGramLM) -> float:
    """exp of the mean negative log-probability over all tokens."""
    log_sum = 0.0
    n_tokens = 0
    for text in _texts(corpus):
        tokens = tokenize(text)
        padded = [_START] * (lm.order - 1) + tokens
        for i in range(lm.order - 1, len(padded)):
            context = tuple(padded[i - lm.order + 1 : i])
            log_sum += math.log(lm.prob(context, padded[i]))
            n_tokens += 1
    if n_tokens == 0:
        raise EmptyCorpus("perplexity needs at least one token")
    return math.exp(-log_sum / n_tokens)


def _ontology_pattern(ontology: list[str]) -> re.Pattern:
    terms = [t.strip() for t in ontology if t.strip()]
    if not terms:
        raise EmptyOntology("ontology has no terms")
    alternation = "|".join(re.escape(t) for t in sorted(terms, key=len, reverse=True))
    return re.compile(rf"(?<![A-Za-z0-9])(?:{alternation})(?![A-Za-z0-9])", re.IGNORECASE)


def medical_plausibility(corpus, ontology: list[str]) -> float:
    """Fraction of notes containing at least one ontology term."""
    texts = _texts(corpus)
    if not texts:
        raise EmptyCorpus("plausibility needs at least one note")
    finder = _ontology_pattern(ontology)
    hits = sum(1 for text in texts if finder.search(text))
    return hits / len(texts)


@dataclass(frozen=True)
class QualityReport:
    self_bleu: float
    perplexity: float
    entropy_bits: float
    plausibility: float
    n_notes: int


def compute_quality_report(
    corpus,
    ontology: list[str],
    *,
    lm: NGramLM | None = None,
    order: int = 2,
    smoothing_k: float = 0.1,
    max_n: int = 4,
) -> QualityReport:
    """All four metrics for one corpus.

    Perplexity is scored under `lm` when given (e.g., a model trained on real
    notes); otherwise under a model trained on the corpus itself, which makes
    the number a self-contained fluency proxy.
    """
    texts = _texts(corpus)
    model = lm if lm is not None else train_ngram_lm(texts, order, smoothing_k)
    return QualityReport(
        self_bleu=self_bleu(texts, max_n=max_n),
        perplexity=perplexity(texts, model),
        entropy_bits=corpus_entropy(texts),
        plausibility=medical_plausibility(texts, ontology),
        n_notes=len(texts),
    )


def quality_report_to_json(report: QualityReport) -> dict:
    return {
        "bleu": report.self_bleu,
        "perplexity": report.perplexity,
        "entropy": report.entropy_bits,
        "plausibility": report.plausibility,
        "n_notes": report.n_notes,
    }


def load_ontology(path: str | Path) -> list[str]:
    """One term per line; '#' comments and blanks skipped."""
    terms = [
        line.strip()
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not terms:
        raise EmptyOntology(f"{path}: no terms")
    return terms


def default_ontology() -> list[str]:
    """Medical term list bundled with the package."""
    root = resources.files("lppa") / "assets" / "ontology" / "medical_terms.txt"
    with resources.as_file(root) as path:
        return load_ontology(path)
