"""Independent reference implementations used to cross-check the library.

Deliberately written with different mechanics than the implementations under
test: bag matching by list removal instead of Counter intersection, running
accumulators instead of sum(), and a t-distribution CDF via the regularized
incomplete beta function instead of scipy. Keep it that way — these are the
oracles, and sharing code with the implementation would make the comparison
circular.
"""

from __future__ import annotations

import random

from mpmath import betainc, mp

from lppa.entities import DEFAULT_NORMALIZATION, ENTITY_TYPES, PhiDictionary, normalize_mention

mp.dps = 50

# Small mention alphabet with deliberate normalization collisions and
# near-misses, so randomized pairs exercise duplicates and multiset edges.
MENTION_POOL = [
    "Ann",
    "ann",
    " Ann ",
    "Ann.",
    "Bob Lee",
    "bob  lee",
    "45",
    "450",
    "May 3, 2023",
    "may 3, 2023",
    "958-780-1849",
    "(958) 780-1849",
    "dallas",
    "Dallas",
    "j.doe@x.org",
]


def random_phi(rng: random.Random, max_types: int = 4, max_mentions: int = 4) -> PhiDictionary:
    entries: dict[str, list[str]] = {}
    for entity_type in rng.sample(ENTITY_TYPES, rng.randint(0, max_types)):
        entries[entity_type] = [
            rng.choice(MENTION_POOL) for _ in range(rng.randint(1, max_mentions))
        ]
    return PhiDictionary(entries)


def random_phi_pairs(seed: int, n: int) -> list[tuple[PhiDictionary, PhiDictionary]]:
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        gold = random_phi(rng)
        # Half the time derive pred from gold so overlap is common.
        if rng.random() < 0.5:
            entries = {t: list(m) for t, m in gold.items()}
            for t in list(entries):
                if rng.random() < 0.3:
                    del entries[t]
                elif rng.random() < 0.5:
                    entries[t].append(rng.choice(MENTION_POOL))
            pred = PhiDictionary(entries)
        else:
            pred = random_phi(rng)
        pairs.append((gold, pred))
    return pairs


def brute_counts(gold, pred, policy=DEFAULT_NORMALIZATION):
    out = {}
    for entity_type in ENTITY_TYPES:
        g = [normalize_mention(m, policy) for m in gold.mentions(entity_type)]
        p = [normalize_mention(m, policy) for m in pred.mentions(entity_type)]
        if not g and not p:
            continue
        left = list(g)
        tp = 0
        for m in p:
            if m in left:
                left.remove(m)
                tp += 1
        out[entity_type] = (tp, len(p), len(g))
    return out


def brute_prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    if n_pred == 0 and n_gold == 0:
        return (1.0, 1.0, 1.0)
    pr = tp / n_pred if n_pred else 0.0
    rc = tp / n_gold if n_gold else 0.0
    f1 = 2 * pr * rc / (pr + rc) if pr + rc > 0 else 0.0
    return (pr, rc, f1)


def brute_note(gold, pred, policy=DEFAULT_NORMALIZATION):
    counts = brute_counts(gold, pred, policy)
    per_type = {t: brute_prf(*c) for t, c in counts.items()}
    tp = n_pred = n_gold = 0
    for c in counts.values():
        tp += c[0]
        n_pred += c[1]
        n_gold += c[2]
    return per_type, brute_prf(tp, n_pred, n_gold)


def brute_corpus(pairs, policy=DEFAULT_NORMALIZATION):
    """Returns (per_type map or None, overall triple, per-note overall f1)."""
    type_rows: dict[str, list[tuple[float, float, float]]] = {t: [] for t in ENTITY_TYPES}
    pred_seen: dict[str, int] = {t: 0 for t in ENTITY_TYPES}
    overall_rows: list[tuple[float, float, float]] = []
    for gold, pred in pairs:
        counts = brute_counts(gold, pred, policy)
        per_type, overall = brute_note(gold, pred, policy)
        overall_rows.append(overall)
        for t, triple in per_type.items():
            type_rows[t].append(triple)
        for t, c in counts.items():
            pred_seen[t] += c[1]

    def mean_rows(rows):
        acc = [0.0, 0.0, 0.0]
        for row in rows:
            acc[0] += row[0]
            acc[1] += row[1]
            acc[2] += row[2]
        return (acc[0] / len(rows), acc[1] / len(rows), acc[2] / len(rows))

    per_type_out = {
        t: (None if pred_seen[t] == 0 else mean_rows(type_rows[t])) for t in ENTITY_TYPES
    }
    return per_type_out, mean_rows(overall_rows), [row[2] for row in overall_rows]


def brute_bleu(candidate, references, max_n=4, eps=1e-9):
    """BLEU from first principles: list-based n-gram counting, no Counter."""
    import math

    logs = []
    for n in range(1, max_n + 1):
        grams = [tuple(candidate[i : i + n]) for i in range(len(candidate) - n + 1)]
        if not grams:
            logs.append(math.log(eps))
            continue
        clipped = 0
        for g in set(grams):
            best = 0
            for ref in references:
                rgrams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
                if rgrams.count(g) > best:
                    best = rgrams.count(g)
            clipped += min(grams.count(g), best)
        logs.append(math.log(clipped / len(grams)) if clipped else math.log(eps))
    c = len(candidate)
    r = sorted((abs(len(ref) - c), len(ref)) for ref in references)[0][1]
    bp = 1.0 if c > r else (math.exp(1 - r / c) if c else 0.0)
    return bp * math.exp(sum(logs) / max_n)


def brute_self_bleu(token_lists, max_n=4):
    scores = [
        brute_bleu(cand, token_lists[:i] + token_lists[i + 1 :], max_n)
        for i, cand in enumerate(token_lists)
    ]
    return sum(scores) / len(scores)


def student_t_two_sided_p(t: float, df: int) -> float:
    """Two-sided p for Student's t via the regularized incomplete beta."""
    x = df / (df + t * t)
    return float(betainc(df / 2.0, 0.5, 0, x, regularized=True))


def brute_paired_t(a: list[float], b: list[float]) -> tuple[float | None, float]:
    d = [x - y for x, y in zip(a, b)]
    n = len(d)
    mean = 0.0
    for v in d:
        mean += v
    mean /= n
    ss = 0.0
    for v in d:
        ss += (v - mean) ** 2
    if ss == 0.0:
        return (None, 1.0) if mean == 0.0 else (float("inf") if mean > 0 else float("-inf"), 0.0)
    sd = (ss / (n - 1)) ** 0.5
    t = mean * (n**0.5) / sd
    return t, student_t_two_sided_p(t, n - 1)
