"""Command-line front end: one subcommand per pipeline stage.

Exit codes: 0 success, 1 operational error (bad data, unreachable endpoint),
2 usage error. The API key is read from the LPPA_API_KEY environment variable
only — there is deliberately no flag for it.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import costs, quality, ruletag, synth
from .annotator import RetryPolicy, annotate_corpus, audit_log
from .deid import DeidPolicy, deidentify, verify_clean
from .entities import (
    DEFAULT_NORMALIZATION,
    NormalizationPolicy,
    load_corpus,
    save_corpus,
)
from .errors import ConfigError, LengthMismatch, LppaError, MissingGold
from .evaluate import render_report, report_to_json, score_corpus
from .transports import build_transport

_PATH_KEYS = (
    "rules", "dictionaries", "pools", "ontology", "pricing", "records", "exemplars",
)


@dataclasses.dataclass(frozen=True)
class AppConfig:
    endpoint: str = "mock:0"
    model: str = ""
    timeout: float = 60.0
    seed: int = 0
    concurrency: int = 1
    normalization: NormalizationPolicy = DEFAULT_NORMALIZATION
    deid: DeidPolicy = DeidPolicy()
    paths: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        for key, value in self.paths.items():
            if key not in _PATH_KEYS:
                raise ConfigError(f"unknown path key {key!r}")
            if not Path(value).exists():
                raise ConfigError(f"configured {key} path does not exist: {value}")


def load_config(path: str | Path) -> AppConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    known = {"endpoint", "model", "timeout", "seed", "concurrency",
             "normalization", "deid", "paths"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    try:
        normalization = NormalizationPolicy(**data.get("normalization", {}))
        deid_policy = DeidPolicy(**data.get("deid", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return AppConfig(
        endpoint=data.get("endpoint", "mock:0"),
        model=data.get("model", ""),
        timeout=data.get("timeout", 60.0),
        seed=data.get("seed", 0),
        concurrency=data.get("concurrency", 1),
        normalization=normalization,
        deid=deid_policy,
        paths=data.get("paths", {}),
    )


def _pick(flag_value, config: AppConfig, key: str):
    return flag_value if flag_value is not None else config.paths.get(key)


def _transport(args, config: AppConfig):
    endpoint = args.endpoint if args.endpoint is not None else config.endpoint
    return build_transport(endpoint, model=config.model, timeout=config.timeout)


def _ruleset(args, config: AppConfig):
    rules_path = _pick(getattr(args, "rules", None), config, "rules")
    dicts_path = _pick(getattr(args, "dicts", None), config, "dictionaries")
    if rules_path is None and dicts_path is None:
        return ruletag.default_ruleset()
    if rules_path is None:
        raise ConfigError("--dicts requires --rules")
    return ruletag.load_ruleset(rules_path, dicts_path)


def _paired_dictionaries(gold_path, pred_path, what="pred"):
    gold = load_corpus(gold_path)
    pred_by_id = {record.id: record for record in load_corpus(pred_path)}
    gold_ids = [record.id for record in gold]
    if set(gold_ids) != set(pred_by_id):
        raise LengthMismatch(
            f"gold and {what} corpora cover different note ids"
            f" ({len(gold_ids)} gold vs {len(pred_by_id)} {what})"
        )
    pairs = []
    for record in gold:
        other = pred_by_id[record.id]
        if record.phi is None:
            raise MissingGold(f"gold note {record.id} has no annotations")
        if other.phi is None:
            raise MissingGold(f"{what} note {other.id} has no annotations")
        pairs.append((record.phi, other.phi))
    return pairs


# -- subcommand handlers ------------------------------------------------------


def _cmd_generate(args, config: AppConfig) -> int:
    transport = _transport(args, config)
    seed = args.seed if args.seed is not None else config.seed
    records = exemplars = pools = None
    records_path = _pick(args.records, config, "records")
    if records_path is not None:
        records = synth.load_records(records_path)
    exemplars_path = _pick(args.exemplars, config, "exemplars")
    if exemplars_path is not None:
        exemplars = synth.load_exemplars(exemplars_path)
    pools_path = _pick(args.pools, config, "pools")
    if pools_path is not None:
        pools = synth.load_pools(pools_path)
    corpus = synth.generate_corpus(
        args.mode,
        args.count,
        transport,
        seed,
        records=records,
        exemplars=exemplars,
        pools=pools,
        parallelism=args.concurrency or config.concurrency,
    )
    n = save_corpus(corpus, args.out)
    print(f"wrote {n} notes to {args.out}")
    return 0


def _cmd_mix(args, config: AppConfig) -> int:
    seed = args.seed if args.seed is not None else config.seed
    mixed = synth.mix_corpora(load_corpus(args.a), load_corpus(args.b), seed)
    n = save_corpus(mixed, args.out)
    print(f"wrote {n} notes to {args.out}")
    return 0


def _cmd_tag(args, config: AppConfig) -> int:
    rules = _ruleset(args, config)
    notes = load_corpus(args.inp)
    tagged = [
        dataclasses.replace(note, phi=ruletag.tag_note(note, rules)) for note in notes
    ]
    n = save_corpus(tagged, args.out)
    print(f"tagged {n} notes into {args.out}")
    return 0


def _cmd_annotate(args, config: AppConfig) -> int:
    if not audit_log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        audit_log.addHandler(handler)
    audit_log.setLevel(logging.INFO)
    transport = _transport(args, config)
    notes = load_corpus(args.inp)
    retry = RetryPolicy(max_attempts=args.max_attempts)
    outcomes = annotate_corpus(
        notes, transport, retry, parallelism=args.concurrency or config.concurrency
    )
    annotated = []
    failures = 0
    for note, outcome in zip(notes, outcomes):
        if outcome.ok:
            annotated.append(dataclasses.replace(note, phi=outcome.phi))
        else:
            failures += 1
            print(f"note {outcome.note_id}: {outcome.error}", file=sys.stderr)
    save_corpus(annotated, args.out)
    print(f"annotated {len(annotated)} of {len(notes)} notes into {args.out}")
    return 1 if failures else 0


def _cmd_deid(args, config: AppConfig) -> int:
    policy = config.deid
    if args.label_format is not None:
        try:
            policy = DeidPolicy(
                label_format=args.label_format,
                case_insensitive=policy.case_insensitive,
                word_boundary=policy.word_boundary,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    notes = load_corpus(args.inp)
    cleaned = []
    residuals = leaks = 0
    for note in notes:
        if note.phi is None:
            raise MissingGold(f"note {note.id} has no annotations to redact")
        result = deidentify(note.text, note.phi, policy)
        residuals += len(result.residuals)
        leaks += len(verify_clean(result, note.phi, policy))
        cleaned.append(dataclasses.replace(note, text=result.text, phi=None))
    n = save_corpus(cleaned, args.out)
    print(f"deidentified {n} notes into {args.out}"
          f" ({residuals} residuals, {leaks} verification leaks)")
    return 0


def _cmd_eval(args, config: AppConfig) -> int:
    pairs = _paired_dictionaries(args.gold, args.pred)
    report = score_corpus(pairs, config.normalization)
    name = Path(args.pred).stem
    if args.baseline is not None:
        baseline_pairs = _paired_dictionaries(args.gold, args.baseline, "baseline")
        baseline_report = score_corpus(baseline_pairs, config.normalization)
        reports = [("baseline", baseline_report), (name, report)]
        rendered = render_report(reports, baseline="baseline")
    else:
        rendered = render_report([(name, report)])
    if args.json:
        print(json.dumps(report_to_json(report), indent=2))
    else:
        print(rendered)
    return 0


def _cmd_synthqual(args, config: AppConfig) -> int:
    corpus = load_corpus(args.inp)
    ontology_path = _pick(args.ontology, config, "ontology")
    ontology = (
        quality.load_ontology(ontology_path)
        if ontology_path is not None
        else quality.default_ontology()
    )
    lm = None
    if args.reference is not None:
        lm = quality.train_ngram_lm(
            load_corpus(args.reference), args.order, args.smoothing_k
        )
    report = quality.compute_quality_report(
        corpus, ontology, lm=lm, order=args.order, smoothing_k=args.smoothing_k
    )
    print(json.dumps(quality.quality_report_to_json(report), indent=2))
    return 0


def _cmd_export_train(args, config: AppConfig) -> int:
    n = synth.export_training_set(load_corpus(args.inp), args.out)
    print(f"wrote {n} training lines to {args.out}")
    return 0


def _cmd_cost(args, config: AppConfig) -> int:
    pricing_path = _pick(args.pricing, config, "pricing")
    table = (
        costs.load_pricing(pricing_path)
        if pricing_path is not None
        else costs.default_pricing()
    )
    if args.model not in table:
        raise ConfigError(
            f"no pricing for model {args.model!r}; available: {sorted(table)}"
        )
    estimate = costs.estimate_cost(
        args.calls, args.avg_in, args.avg_out, table[args.model]
    )
    print(
        json.dumps(
            {
                "model": args.model,
                "n_calls": estimate.n_calls,
                "input_tokens": estimate.input_tokens,
                "output_tokens": estimate.output_tokens,
                "total_cost": estimate.total_cost,
            }
        )
    )
    return 0


# -- parser -------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lppa",
        description="Synthetic clinical-note generation, PHI annotation,"
        " de-identification, and evaluation.",
    )
    parser.add_argument("--config", help="JSON config file with defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate synthetic notes")
    p.add_argument("--mode", choices=("aeg", "spi"), required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--endpoint")
    p.add_argument("--records", help="structured records JSONL (spi)")
    p.add_argument("--exemplars", help="directory of exemplar .txt files (spi)")
    p.add_argument("--pools", help="directory of identity pool files")
    p.add_argument("--concurrency", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_generate)

    p = sub.add_parser("mix", help="shuffle two corpora together")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_mix)

    p = sub.add_parser("tag", help="rule-based PHI tagging")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--rules", help="pattern file (TYPE<TAB>priority<TAB>regex)")
    p.add_argument("--dicts", help="directory of dictionary term files")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_tag)

    p = sub.add_parser("annotate", help="LLM-backed PHI annotation")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--endpoint")
    p.add_argument("--concurrency", type=int)
    p.add_argument("--max-attempts", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_annotate)

    p = sub.add_parser("deid", help="replace annotated PHI with type labels")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--label-format", help="replacement template, e.g. [{TYPE}]")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_deid)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--baseline", help="second system for the paired t-test")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("synthqual", help="corpus quality metrics")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--reference", help="train the perplexity LM on this corpus")
    p.add_argument("--ontology")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--smoothing-k", type=float, default=0.1)
    p.set_defaults(handler=_cmd_synthqual)

    p = sub.add_parser("export-train", help="chat-format training export")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_export_train)

    p = sub.add_parser("cost", help="token and price estimate for a run")
    p.add_argument("--calls", type=int, required=True)
    p.add_argument("--avg-in", type=int, required=True)
    p.add_argument("--avg-out", type=int, required=True)
    p.add_argument("--model", default="gpt-4")
    p.add_argument("--pricing")
    p.set_defaults(handler=_cmd_cost)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help
        return int(exc.code or 0)
    try:
        config = load_config(args.config) if args.config else AppConfig()
        return args.handler(args, config)
    except LppaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
