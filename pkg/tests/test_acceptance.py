"""Release gate: one test per top-level guarantee, one printed line each.

Run `python3 -m pytest tests/test_acceptance.py -v -s` to see a [PASS]/[FAIL]
line per criterion. Every check here is backed by an independent oracle or an
analytically known value — never by the implementation under test.
"""

import json
import math
import random
import time
from contextlib import contextmanager
from importlib import resources
from types import SimpleNamespace

import pytest

from oracles import (
    brute_corpus,
    brute_note,
    brute_paired_t,
    random_phi_pairs,
)

from lppa.costs import default_pricing, estimate_cost
from lppa.deid import deidentify, verify_clean
from lppa.entities import PhiDictionary, parse_phi_dictionary
from lppa.evaluate import paired_t_test, render_report, score_corpus, score_note
from lppa.mocktransport import TemplateTransport
from lppa.prompts import (
    build_aeg_prompt,
    build_spi_prompt,
    build_task_prompt,
)
from lppa.quality import (
    corpus_entropy,
    medical_plausibility,
    perplexity,
    self_bleu,
    train_ngram_lm,
)
from lppa.ruletag import default_ruleset, load_ruleset, tag_corpus
from lppa.synth import export_training_set, generate_corpus, mix_corpora

GOLDEN = resources.files("lppa") / "assets" / "golden"
RULES = resources.files("lppa") / "assets" / "rules"


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


@pytest.fixture(scope="module")
def spi_500():
    return generate_corpus("spi", 500, TemplateTransport(seed=0), master_seed=500)


def test_metric_oracle_equivalence():
    with criterion("metric oracle equivalence: 200 randomized pairs, exact, < 5 s"):
        start = time.perf_counter()
        pairs = random_phi_pairs(seed=200, n=200)
        for gold, pred in pairs:
            per_type, overall = score_note(gold, pred)
            oracle_types, oracle_overall = brute_note(gold, pred)
            assert set(per_type) == set(oracle_types)
            for entity_type, triple in per_type.items():
                assert (triple.precision, triple.recall, triple.f1) == oracle_types[
                    entity_type
                ]
            assert (overall.precision, overall.recall, overall.f1) == oracle_overall

        report = score_corpus(pairs)
        oracle_per_type, oracle_overall, oracle_f1s = brute_corpus(pairs)
        for entity_type, triple in report.per_type.items():
            if triple is None:
                assert oracle_per_type[entity_type] is None
            else:
                assert (
                    triple.precision,
                    triple.recall,
                    triple.f1,
                ) == oracle_per_type[entity_type]
        assert (
            report.overall.precision,
            report.overall.recall,
            report.overall.f1,
        ) == oracle_overall
        assert report.per_note_overall_f1 == oracle_f1s
        assert time.perf_counter() - start < 5.0


def test_deid_completeness(spi_500):
    with criterion("deid completeness: 500 fixtures clean, idempotent, example exact"):
        for record in spi_500:
            result = deidentify(record.text, record.phi)
            assert result.residuals == ()
            assert verify_clean(result, record.phi) == []
            second = deidentify(result.text, record.phi)
            assert second.text == result.text
            assert not second.replacements

        phi = PhiDictionary(
            {"PERSON": ["John Doe"], "AGE": ["45"], "DATE_TIME": ["May 3, 2023"]}
        )
        out = deidentify(
            "John Doe, a 45-year-old male, was diagnosed with hypertension "
            "on May 3, 2023",
            phi,
        )
        assert out.text == (
            "[PERSON], a [AGE]-year-old male, was diagnosed with hypertension "
            "on [DATE_TIME]"
        )


def test_prompt_golden_files():
    with criterion("prompt golden files: byte-for-byte, markers and special cases"):
        def golden(name):
            return (GOLDEN / name).read_text(encoding="utf-8")

        task = build_task_prompt(golden("demo_note.txt"))
        assert task.system == golden("task_system.txt")
        assert task.user == golden("task_user.txt")

        aeg = build_aeg_prompt(1)
        assert aeg.system == golden("aeg_system.txt")
        assert aeg.user == golden("aeg_user.txt")
        assert (
            "1. When you generate 'Dr. John', you should only extract 'John' "
            "as a PHI element" in aeg.system
        )
        assert (
            "2. When you generate 'Mr. John', you should take 'Mr. John' "
            "as a PHI element" in aeg.system
        )

        record = SimpleNamespace(**json.loads(golden("demo_record.json")))
        identity = SimpleNamespace(**json.loads(golden("demo_identity.json")))
        spi = build_spi_prompt(record, identity, golden("demo_exemplar.txt"))
        assert spi.system == golden("spi_system.txt")
        assert spi.user == golden("spi_user.txt")
        for marker in (
            "<INFORMATION>",
            "<END OF INFORMATION>",
            "<EXAMPLE>",
            "<END OF EXAMPLE>",
        ):
            assert marker in spi.user


def test_quality_analytic_cases():
    with criterion("quality metrics: BLEU/entropy/perplexity/plausibility analytic"):
        identical = ["alpha beta gamma delta epsilon"] * 6
        assert abs(self_bleu(identical) - 1.0) <= 1e-9

        assert abs(corpus_entropy(["a b c d e"]) - math.log2(5)) <= 1e-9
        assert abs(corpus_entropy(["a b c d a b c d"]) - math.log2(4)) <= 1e-9

        lm = train_ngram_lm(["a b c d"], order=1, smoothing_k=0.1)
        assert abs(perplexity(["a a b c d d"], lm) - 4.0) <= 1e-6

        nine_of_ten = ["patient on metformin today"] * 9 + ["walked the dog"]
        assert medical_plausibility(nine_of_ten, ["metformin"]) == 0.9


def test_t_test_oracle():
    with criterion("t-test oracle: 50 random samples within 1e-6, zero-diff p=1"):
        rng = random.Random(5050)
        for _ in range(50):
            n = rng.randint(4, 30)
            a = [rng.random() for _ in range(n)]
            b = [rng.random() for _ in range(n)]
            result = paired_t_test(a, b)
            t_ref, p_ref = brute_paired_t(a, b)
            assert abs(result.p - p_ref) <= 1e-6
            assert math.isclose(result.t, t_ref, rel_tol=1e-9)

        same = [0.5, 0.7, 0.9, 0.4]
        zero = paired_t_test(same, same)
        assert zero.p == 1.0
        assert not zero.significant

        pairs = random_phi_pairs(seed=9, n=6)
        report = score_corpus(pairs)
        table = render_report(
            [("baseline", report), ("same", report)], baseline="baseline"
        )
        assert "*" not in table


def test_pipeline_determinism(tmp_path):
    with criterion("pipeline determinism: 4000-record export byte-identical twice"):
        def run(tag):
            transport = TemplateTransport(seed=0)
            aeg = generate_corpus("aeg", 3000, transport, master_seed=1)
            spi = generate_corpus("spi", 1000, transport, master_seed=2)
            mixed = mix_corpora(aeg, spi, seed=3)
            out = tmp_path / f"train-{tag}.jsonl"
            assert export_training_set(mixed, out) == 4000
            return mixed, out.read_bytes()

        first_corpus, first_bytes = run("a")
        _, second_bytes = run("b")
        assert first_bytes == second_bytes

        lines = first_bytes.decode("utf-8").splitlines()
        assert len(lines) == 4000
        for record, line in zip(first_corpus, lines):
            payload = json.loads(line)
            roles = [m["role"] for m in payload["messages"]]
            assert roles == ["system", "user", "assistant"]
            assistant = payload["messages"][2]["content"]
            assert parse_phi_dictionary(assistant, strict=True) == record.phi


def test_rule_tagger_recall_floor(spi_500, tmp_path):
    with criterion("rule tagger: recall floors on 500-note fixture, AGE-less '/'"):
        tagged = dict(tag_corpus(spi_500, default_ruleset()))
        pairs = [(record.phi, tagged[record.id]) for record in spi_500]
        report = score_corpus(pairs)
        for entity_type in ("PHONE_NUMBER", "EMAIL", "ZIP", "URL"):
            assert report.per_type[entity_type].recall >= 0.95, entity_type
        assert report.per_type["DATE_TIME"].recall >= 0.80

        patterns = (RULES / "patterns.tsv").read_text(encoding="utf-8")
        kept = [
            line
            for line in patterns.splitlines()
            if line and not line.startswith("AGE\t")
        ]
        no_age_file = tmp_path / "no_age.tsv"
        no_age_file.write_text("\n".join(kept) + "\n", encoding="utf-8")
        no_age = load_ruleset(no_age_file)

        ageless = dict(tag_corpus(spi_500, no_age))
        ageless_report = score_corpus(
            [(record.phi, ageless[record.id]) for record in spi_500]
        )
        assert ageless_report.per_type["AGE"] is None
        rendered = render_report([("tagger", ageless_report)])
        header = rendered.splitlines()[0].split(" | ")
        row = rendered.splitlines()[1].split(" | ")
        for column in ("AGE Pr", "AGE Re", "AGE F1"):
            assert row[header.index(column)] == "/"


def test_cost_arithmetic():
    with criterion("cost arithmetic: 4000 calls x (1600 in, 500 out) token totals"):
        estimate = estimate_cost(4000, 1600, 500, default_pricing()["gpt-4"])
        assert estimate.input_tokens == 6_400_000
        assert estimate.output_tokens == 2_000_000
