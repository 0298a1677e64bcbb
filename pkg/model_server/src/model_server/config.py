"""Environment-driven configuration for the scorer sidecar."""

from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_EMBED_MODEL = "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2"
DEFAULT_NLI_MODEL = "joeddav/xlm-roberta-large-xnli"


@dataclass(frozen=True)
class ModelConfig:
    embed_model: str = DEFAULT_EMBED_MODEL
    nli_model: str = DEFAULT_NLI_MODEL
    device: str = "cpu"
    max_batch_size: int = 32
    # requests above this size answer 413; anything below is split into
    # max_batch_size chunks for inference
    max_request_items: int = 256
    backend: str = "real"
    port: int = 8090

    def __post_init__(self):
        if self.max_batch_size < 1:
            raise ValueError("max_batch_size must be >= 1")
        if self.max_request_items < 1:
            raise ValueError("max_request_items must be >= 1")
        if self.backend not in ("real", "hashed"):
            raise ValueError(f"unknown backend {self.backend!r}")

    @classmethod
    def from_env(cls) -> "ModelConfig":
        env = os.environ
        return cls(
            embed_model=env.get("MODEL_SERVER_EMBED_MODEL", DEFAULT_EMBED_MODEL),
            nli_model=env.get("MODEL_SERVER_NLI_MODEL", DEFAULT_NLI_MODEL),
            device=env.get("MODEL_SERVER_DEVICE", "cpu"),
            max_batch_size=int(env.get("MODEL_SERVER_MAX_BATCH", "32")),
            max_request_items=int(env.get("MODEL_SERVER_MAX_REQUEST", "256")),
            backend=env.get("MODEL_SERVER_BACKEND", "real"),
            port=int(env.get("MODEL_SERVER_PORT", "8090")),
        )
