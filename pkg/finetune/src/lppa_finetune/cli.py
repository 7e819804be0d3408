"""Command line for the finetune adapter.

Exit codes: 0 success, 1 operational failure (bad dataset, no accelerator),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import FinetuneConfig, load_config
from .dataset import validate_dataset
from .errors import FinetuneError
from .trainer import run_finetune


def _config_from(args) -> FinetuneConfig:
    return load_config(args.config) if args.config else FinetuneConfig()


def _cmd_validate(args) -> int:
    stats = validate_dataset(args.data, seq_len=args.seq_len)
    print(json.dumps(stats.as_dict(), indent=2))
    return 0


def _cmd_plan(args) -> int:
    manifest = run_finetune(
        args.data, _config_from(args), dry_run=True, output_dir=args.out
    )
    print(json.dumps(manifest["plan"], indent=2))
    return 0


def _cmd_run(args) -> int:
    manifest = run_finetune(
        args.data, _config_from(args), dry_run=False, output_dir=args.out
    )
    print(json.dumps(manifest["plan"], indent=2))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lppa-finetune",
        description="Validate chat-format exports and plan or run LoRA tuning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="check a training export")
    validate.add_argument("--data", required=True)
    validate.add_argument("--seq-len", type=int, default=512)
    validate.set_defaults(handler=_cmd_validate)

    plan = sub.add_parser("plan", help="dry run: print the resolved plan")
    plan.add_argument("--data", required=True)
    plan.add_argument("--config")
    plan.add_argument("--out", help="also write manifest.json here")
    plan.set_defaults(handler=_cmd_plan)

    run = sub.add_parser("run", help="train on an accelerator")
    run.add_argument("--data", required=True)
    run.add_argument("--config")
    run.add_argument("--out", help="adapter weights + manifest directory")
    run.set_defaults(handler=_cmd_run)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (FinetuneError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
