"""Training configuration with the published defaults baked in.

Every default is load-bearing: tests pin them field-for-field, so changing
one is a contract change, not a tweak.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

PRECISIONS = ("bfloat16", "float16", "float32")

# The published setup targets "specific projection layers and attention heads"
# without naming them; the attention projections are the common choice and are
# overridable via config.
DEFAULT_TARGET_MODULES = ("q_proj", "k_proj", "v_proj", "o_proj")


@dataclass(frozen=True)
class FinetuneConfig:
    base_model: str = "meta-llama/Meta-Llama-3-8B-Instruct"
    lora_rank: int = 16
    lora_alpha: int = 32
    lora_dropout: float = 0.05
    learning_rate: float = 1e-4
    grad_accum_steps: int = 2
    train_batch: int = 8
    eval_batch: int = 1
    seq_len: int = 512
    eval_steps_fraction: float = 0.25
    precision: str = "bfloat16"
    group_by_length: bool = True
    target_modules: tuple[str, ...] = DEFAULT_TARGET_MODULES

    def __post_init__(self):
        if not self.base_model or not self.base_model.strip():
            raise ConfigError("base_model must be a non-empty identifier")
        for name in (
            "lora_rank",
            "lora_alpha",
            "lora_dropout",
            "learning_rate",
            "grad_accum_steps",
            "train_batch",
            "eval_batch",
            "seq_len",
        ):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{name} must be a number, got {value!r}")
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value!r}")
        for name in ("lora_rank", "lora_alpha", "grad_accum_steps",
                     "train_batch", "eval_batch", "seq_len"):
            if not isinstance(getattr(self, name), int):
                raise ConfigError(f"{name} must be an integer")
        if not 0.0 < self.eval_steps_fraction <= 1.0:
            raise ConfigError(
                f"eval_steps_fraction must be in (0, 1], got {self.eval_steps_fraction!r}"
            )
        if self.precision not in PRECISIONS:
            raise ConfigError(
                f"precision must be one of {PRECISIONS}, got {self.precision!r}"
            )
        if not self.target_modules:
            raise ConfigError("target_modules must name at least one module")
        object.__setattr__(self, "target_modules", tuple(self.target_modules))

    @property
    def effective_batch(self) -> int:
        return self.train_batch * self.grad_accum_steps

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["target_modules"] = list(self.target_modules)
        return out


def load_config(path: str | Path) -> FinetuneConfig:
    """Read a JSON config whose keys mirror FinetuneConfig field names."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    known = {f.name for f in fields(FinetuneConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
    if "target_modules" in data:
        modules = data["target_modules"]
        if not isinstance(modules, list) or not all(
            isinstance(m, str) for m in modules
        ):
            raise ConfigError(f"{path}: target_modules must be a list of strings")
        data["target_modules"] = tuple(modules)
    try:
        return FinetuneConfig(**data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
