"""Training-plan resolution and the (guarded) LoRA fine-tuning run.

The dry-run path is first-class: it resolves the complete plan — effective
batch, step count, eval checkpoints — from the dataset and config without
touching model weights, so everything but the GPU work is testable anywhere.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .config import FinetuneConfig
from .dataset import validate_dataset
from .errors import NoAccelerator, OutOfMemory


@dataclass(frozen=True)
class TrainingPlan:
    n_records: int
    effective_batch: int
    steps_per_epoch: int
    eval_steps: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "effective_batch": self.effective_batch,
            "steps_per_epoch": self.steps_per_epoch,
            "eval_steps": list(self.eval_steps),
        }


def resolve_plan(n_records: int, config: FinetuneConfig) -> TrainingPlan:
    """Steps are optimizer steps: one per effective batch, last one partial.

    Eval checkpoints land at each eval_steps_fraction boundary of the epoch,
    rounded up to the next whole step, deduplicated, never past the end.
    """
    if n_records <= 0:
        raise ValueError(f"n_records must be positive, got {n_records}")
    effective = config.effective_batch
    steps = math.ceil(n_records / effective)
    boundaries: list[int] = []
    k = 1
    while True:
        fraction = k * config.eval_steps_fraction
        if fraction > 1.0 + 1e-12:
            break
        step = min(math.ceil(fraction * steps), steps)
        if not boundaries or step != boundaries[-1]:
            boundaries.append(step)
        k += 1
    return TrainingPlan(
        n_records=n_records,
        effective_batch=effective,
        steps_per_epoch=steps,
        eval_steps=tuple(boundaries),
    )


def dataset_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _accelerator_available() -> bool:
    try:
        import torch
    except ImportError:
        return False
    return torch.cuda.is_available()


def build_manifest(
    dataset: str | Path, config: FinetuneConfig, plan: TrainingPlan, *, dry_run: bool
) -> dict:
    return {
        "dataset": str(dataset),
        "dataset_sha256": dataset_sha256(dataset),
        "config": config.as_dict(),
        "plan": plan.as_dict(),
        "dry_run": dry_run,
        "step_log": [],
    }


def run_finetune(
    dataset: str | Path,
    config: FinetuneConfig = FinetuneConfig(),
    dry_run: bool = True,
    output_dir: str | Path | None = None,
) -> dict:
    """Validate the dataset, resolve the plan, then train (or stop short).

    Dry runs never import the training stack and succeed on any machine.
    Real runs require a CUDA accelerator plus the optional [train] extras.
    Returns the run manifest; writes it to output_dir when one is given.
    """
    stats = validate_dataset(dataset, seq_len=config.seq_len)
    plan = resolve_plan(stats.n_records, config)
    manifest = build_manifest(dataset, config, plan, dry_run=dry_run)
    manifest["dataset_stats"] = stats.as_dict()

    if not dry_run:
        if not _accelerator_available():
            raise NoAccelerator(
                "real training needs a CUDA accelerator; use dry_run=True "
                "to inspect the resolved plan"
            )
        try:
            manifest["step_log"] = _train(dataset, config, plan, output_dir)
        except Exception as exc:  # surfaced with the plan attached
            if type(exc).__name__ == "OutOfMemoryError":
                raise OutOfMemory(str(exc), plan=plan.as_dict()) from exc
            raise

    if output_dir is not None:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        manifest_path = output_dir / "manifest.json"
        manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return manifest


def _train(
    dataset: str | Path,
    config: FinetuneConfig,
    plan: TrainingPlan,
    output_dir: str | Path | None,
) -> list[dict]:
    """Real LoRA run. Imports stay local so the dry-run path has no heavy deps."""
    import torch
    from peft import LoraConfig, get_peft_model
    from transformers import (
        AutoModelForCausalLM,
        AutoTokenizer,
        Trainer,
        TrainingArguments,
    )

    tokenizer = AutoTokenizer.from_pretrained(config.base_model)
    if tokenizer.pad_token is None:
        tokenizer.pad_token = tokenizer.eos_token

    records = []
    with Path(dataset).open(encoding="utf-8") as handle:
        for line in handle:
            records.append(json.loads(line)["messages"])

    def encode(messages):
        text = tokenizer.apply_chat_template(messages, tokenize=False)
        out = tokenizer(
            text, truncation=True, max_length=config.seq_len, return_tensors=None
        )
        out["labels"] = list(out["input_ids"])
        return out

    encoded = [encode(m) for m in records]

    model = AutoModelForCausalLM.from_pretrained(
        config.base_model, torch_dtype=getattr(torch, config.precision)
    )
    model = get_peft_model(
        model,
        LoraConfig(
            r=config.lora_rank,
            lora_alpha=config.lora_alpha,
            lora_dropout=config.lora_dropout,
            target_modules=list(config.target_modules),
            task_type="CAUSAL_LM",
        ),
    )

    eval_every = max(1, plan.eval_steps[0]) if plan.eval_steps else plan.steps_per_epoch
    args = TrainingArguments(
        output_dir=str(output_dir or "finetune-out"),
        per_device_train_batch_size=config.train_batch,
        per_device_eval_batch_size=config.eval_batch,
        gradient_accumulation_steps=config.grad_accum_steps,
        learning_rate=config.learning_rate,
        bf16=config.precision == "bfloat16",
        fp16=config.precision == "float16",
        group_by_length=config.group_by_length,
        num_train_epochs=1,
        eval_strategy="steps",
        eval_steps=eval_every,
        logging_steps=1,
        save_strategy="no",
        report_to=[],
    )
    trainer = Trainer(
        model=model, args=args, train_dataset=encoded, eval_dataset=encoded
    )
    result = trainer.train()
    if output_dir is not None:
        model.save_pretrained(str(Path(output_dir) / "adapter"))
    return [{"step": plan.steps_per_epoch, "train_loss": result.training_loss}]
