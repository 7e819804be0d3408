"""Toolkit for privacy-preserving PHI annotation of clinical notes.

Pipeline stages: synthetic note generation (AEG and SPI), rule-based and
LLM-backed PHI annotation, label-substitution de-identification, annotation
evaluation, corpus quality metrics, and chat-format training export.
"""

from .annotator import AnnotationOutcome, RetryPolicy, annotate, annotate_corpus
from .costs import (
    CostEstimate,
    PricingConfig,
    default_pricing,
    estimate_cost,
    estimate_tokens,
    load_pricing,
)
from .deid import (
    DeidPolicy,
    DeidentifiedNote,
    Replacement,
    deidentify,
    verify_clean,
)
from .entities import (
    ENTITY_TYPES,
    NormalizationPolicy,
    NoteRecord,
    PhiDictionary,
    load_corpus,
    normalize_mention,
    parse_phi_dictionary,
    save_corpus,
    serialize_phi_dictionary,
)
from .errors import LppaError
from .evaluate import (
    EvalReport,
    ScoreTriple,
    TTestResult,
    paired_t_test,
    render_report,
    score_corpus,
    score_note,
)
from .prompts import (
    ChatRequest,
    build_aeg_prompt,
    build_spi_prompt,
    build_task_prompt,
)
from .quality import (
    NGramLM,
    QualityReport,
    compute_quality_report,
    corpus_entropy,
    medical_plausibility,
    perplexity,
    self_bleu,
    train_ngram_lm,
)
from .ruletag import Ruleset, default_ruleset, load_ruleset, tag_corpus, tag_note
from .synth import (
    GenerationJob,
    IdentityPools,
    SimulatedIdentity,
    StructuredRecord,
    export_training_set,
    generate_corpus,
    mix_corpora,
    parse_generation,
    simulate_identity,
    validate_generated,
)
from .transports import EndpointConfig, HttpTransport, ScriptedTransport, build_transport

__version__ = "0.1.0"

__all__ = [
    "AnnotationOutcome",
    "ChatRequest",
    "CostEstimate",
    "DeidPolicy",
    "DeidentifiedNote",
    "ENTITY_TYPES",
    "EndpointConfig",
    "EvalReport",
    "GenerationJob",
    "HttpTransport",
    "IdentityPools",
    "LppaError",
    "NGramLM",
    "NormalizationPolicy",
    "NoteRecord",
    "PhiDictionary",
    "PricingConfig",
    "QualityReport",
    "Replacement",
    "RetryPolicy",
    "Ruleset",
    "ScoreTriple",
    "ScriptedTransport",
    "SimulatedIdentity",
    "StructuredRecord",
    "TTestResult",
    "annotate",
    "annotate_corpus",
    "build_aeg_prompt",
    "build_spi_prompt",
    "build_task_prompt",
    "build_transport",
    "compute_quality_report",
    "corpus_entropy",
    "default_pricing",
    "default_ruleset",
    "deidentify",
    "estimate_cost",
    "estimate_tokens",
    "export_training_set",
    "generate_corpus",
    "load_corpus",
    "load_pricing",
    "load_ruleset",
    "medical_plausibility",
    "mix_corpora",
    "normalize_mention",
    "paired_t_test",
    "parse_generation",
    "parse_phi_dictionary",
    "perplexity",
    "render_report",
    "save_corpus",
    "score_corpus",
    "score_note",
    "self_bleu",
    "serialize_phi_dictionary",
    "simulate_identity",
    "tag_corpus",
    "tag_note",
    "train_ngram_lm",
    "validate_generated",
    "verify_clean",
    "__version__",
]
