"""Service configuration from a JSON file and/or environment variables."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

ENV_PREFIX = "NLI_SERVICE"


@dataclass(frozen=True)
class ServiceConfig:
    """Model checkpoint, device, batching limits, and listen port."""

    model: str = "roberta-large-mnli"
    device: str = "auto"
    max_batch_size: int = 256
    inference_batch_size: int = 32
    port: int = 8400

    def __post_init__(self):
        if self.max_batch_size < 1:
            raise ValueError(f"max_batch_size must be >= 1, got {self.max_batch_size}")
        if self.inference_batch_size < 1:
            raise ValueError(
                f"inference_batch_size must be >= 1, got {self.inference_batch_size}"
            )


def load_config(path: str | Path | None = None, env=os.environ) -> ServiceConfig:
    """Build the config from an optional JSON file, then environment overrides.

    Recognised variables: NLI_SERVICE_CONFIG (file path), NLI_SERVICE_MODEL,
    NLI_SERVICE_DEVICE, NLI_SERVICE_MAX_BATCH, NLI_SERVICE_PORT.
    """
    config = ServiceConfig()
    path = path or env.get(f"{ENV_PREFIX}_CONFIG")
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        config = replace(
            config,
            **{key: doc[key] for key in doc if key in ServiceConfig.__dataclass_fields__},
        )
    overrides = {}
    if env.get(f"{ENV_PREFIX}_MODEL"):
        overrides["model"] = env[f"{ENV_PREFIX}_MODEL"]
    if env.get(f"{ENV_PREFIX}_DEVICE"):
        overrides["device"] = env[f"{ENV_PREFIX}_DEVICE"]
    if env.get(f"{ENV_PREFIX}_MAX_BATCH"):
        overrides["max_batch_size"] = int(env[f"{ENV_PREFIX}_MAX_BATCH"])
    if env.get(f"{ENV_PREFIX}_PORT"):
        overrides["port"] = int(env[f"{ENV_PREFIX}_PORT"])
    return replace(config, **overrides) if overrides else config
