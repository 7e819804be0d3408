"""Token and dollar-cost estimation for generation/annotation runs.

estimate_tokens uses the chars/4 rule of thumb — this is a planning figure,
not billing. Plug in a real tokenizer by passing exact token averages to
estimate_cost instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class PricingConfig:
    model: str
    input_price_per_1k: float
    output_price_per_1k: float

    def __post_init__(self) -> None:
        if not self.model:
            raise ConfigError("pricing entry needs a model name")
        if self.input_price_per_1k < 0 or self.output_price_per_1k < 0:
            raise ConfigError(f"{self.model}: prices must be >= 0")


@dataclass(frozen=True)
class CostEstimate:
    n_calls: int
    input_tokens: int
    output_tokens: int
    total_cost: float


def estimate_tokens(text: str) -> int:
    """Approximate token count: ceiling(len/4)."""
    return math.ceil(len(text) / 4)


def estimate_cost(
    n_calls: int, avg_in: float, avg_out: float, pricing: PricingConfig
) -> CostEstimate:
    """Totals for a run of n_calls averaging avg_in/avg_out tokens per call."""
    if n_calls < 0 or avg_in < 0 or avg_out < 0:
        raise ValueError("counts must be >= 0")
    input_tokens = round(n_calls * avg_in)
    output_tokens = round(n_calls * avg_out)
    total = (
        input_tokens * pricing.input_price_per_1k
        + output_tokens * pricing.output_price_per_1k
    ) / 1000
    return CostEstimate(n_calls, input_tokens, output_tokens, total)


def load_pricing(path: str | Path) -> dict[str, PricingConfig]:
    """Read pricing entries; accepts a list of objects or a model-keyed map."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    entries: list[dict] = []
    if isinstance(data, list):
        entries = data
    elif isinstance(data, dict):
        entries = [{"model": model, **fields} for model, fields in data.items()]
    else:
        raise ConfigError(f"{path}: expected a list or object of pricing entries")
    out: dict[str, PricingConfig] = {}
    for entry in entries:
        try:
            config = PricingConfig(**entry)
        except TypeError as exc:
            raise ConfigError(f"{path}: bad pricing entry {entry!r}: {exc}") from None
        if config.model in out:
            raise ConfigError(f"{path}: duplicate pricing for {config.model!r}")
        out[config.model] = config
    if not out:
        raise ConfigError(f"{path}: no pricing entries")
    return out


def default_pricing() -> dict[str, PricingConfig]:
    """Representative bundled price table (prices drift; override via file)."""
    root = resources.files("lppa") / "assets" / "pricing" / "pricing.json"
    with resources.as_file(root) as path:
        return load_pricing(path)
