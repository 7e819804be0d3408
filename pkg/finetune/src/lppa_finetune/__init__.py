"""LoRA instruction-tuning adapter for chat-format PHI annotation exports."""

from .config import DEFAULT_TARGET_MODULES, FinetuneConfig, load_config
from .dataset import ENTITY_TYPES, DatasetStats, estimate_tokens, validate_dataset
from .errors import (
    ConfigError,
    FinetuneError,
    NoAccelerator,
    OutOfMemory,
    SchemaError,
)
from .trainer import TrainingPlan, build_manifest, dataset_sha256, resolve_plan, run_finetune

__all__ = [
    "ConfigError",
    "DEFAULT_TARGET_MODULES",
    "DatasetStats",
    "ENTITY_TYPES",
    "FinetuneConfig",
    "FinetuneError",
    "NoAccelerator",
    "OutOfMemory",
    "SchemaError",
    "TrainingPlan",
    "build_manifest",
    "dataset_sha256",
    "estimate_tokens",
    "load_config",
    "resolve_plan",
    "run_finetune",
    "validate_dataset",
]

__version__ = "0.1.0"
