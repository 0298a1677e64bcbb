"""Inference backends behind the wire protocol.

``real`` wraps a sentence-transformers bi-encoder and a cross-encoder NLI
model (imported lazily so the server package works without the heavy
dependencies installed). ``hashed`` is a dependency-free deterministic
backend used for protocol testing and as a stand-in while models download.
"""

from __future__ import annotations

import math
import re
import unicodedata
import zlib

import numpy as np

from .config import ModelConfig

NLI_LABELS = ["contradiction", "entailment", "neutral"]

_LETTER_RUN = re.compile(r"[^\W\d_]+", re.UNICODE)
_NEGATION = frozenset({"δεν", "μην", "οχι", "not", "no", "never"})


def _fold_tokens(text: str) -> list[str]:
    folded = []
    for ch in text:
        for d in unicodedata.normalize("NFD", ch):
            if not unicodedata.combining(d):
                folded.append(d.casefold())
    return _LETTER_RUN.findall("".join(folded))


class HashedEmbeddingBackend:
    """Counted bag of crc32-hashed tokens; deterministic, not semantic."""

    def __init__(self, dim: int = 384):
        self.name = "hashed-bag"
        self.dim = dim

    def embed(self, texts: list[str]) -> np.ndarray:
        rows = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            tokens = _fold_tokens(text)
            if not tokens:
                rows[i, 0] = 1.0
                continue
            for token in tokens:
                rows[i, zlib.crc32(token.encode("utf-8")) % self.dim] += 1.0
        return rows


class HashedNliBackend:
    """Token containment with negation parity, softmaxed into [c, e, n]."""

    def __init__(self):
        self.name = "hashed-rule"

    def predict(self, pairs: list[tuple[str, str]]) -> np.ndarray:
        logits = np.zeros((len(pairs), 3), dtype=np.float64)
        for i, (premise, hypothesis) in enumerate(pairs):
            p_tokens = _fold_tokens(premise)
            h_tokens = _fold_tokens(hypothesis)
            contained = {t for t in h_tokens if t not in _NEGATION} <= {
                t for t in p_tokens if t not in _NEGATION
            }
            mismatch = (
                sum(t in _NEGATION for t in p_tokens) % 2
                != sum(t in _NEGATION for t in h_tokens) % 2
            )
            if contained:
                logits[i, 0 if mismatch else 1] = 4.0
            else:
                logits[i, 2] = 2.0
        shifted = logits - logits.max(axis=1, keepdims=True)
        exps = np.exp(shifted)
        return exps / exps.sum(axis=1, keepdims=True)


class SentenceEmbeddingBackend:
    """sentence-transformers bi-encoder."""

    def __init__(self, model_name: str, device: str):
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(model_name, device=device)
        self.name = model_name
        self.dim = self._model.get_sentence_embedding_dimension()

    def embed(self, texts: list[str]) -> np.ndarray:
        return np.asarray(
            self._model.encode(texts, convert_to_numpy=True, show_progress_bar=False),
            dtype=np.float64,
        )


class CrossEncoderNliBackend:
    """transformers sequence classifier over premise-hypothesis pairs.

    Checkpoints order their labels differently; columns are remapped to the
    wire order [contradiction, entailment, neutral] via id2label.
    """

    def __init__(self, model_name: str, device: str):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(model_name)
        self._model = AutoModelForSequenceClassification.from_pretrained(model_name)
        self._model.to(device)
        self._model.eval()
        self._device = device
        self.name = model_name
        self._column_order = self._resolve_columns(self._model.config.id2label)

    @staticmethod
    def _resolve_columns(id2label: dict) -> list[int]:
        order = []
        for wanted in NLI_LABELS:
            matches = [
                int(idx) for idx, label in id2label.items() if wanted in str(label).lower()
            ]
            if len(matches) != 1:
                raise ValueError(f"cannot locate {wanted!r} in labels {id2label}")
            order.append(matches[0])
        return order

    def predict(self, pairs: list[tuple[str, str]]) -> np.ndarray:
        premises = [p for p, _ in pairs]
        hypotheses = [h for _, h in pairs]
        batch = self._tokenizer(
            premises, hypotheses, padding=True, truncation=True, return_tensors="pt"
        ).to(self._device)
        with self._torch.no_grad():
            logits = self._model(**batch).logits.cpu().numpy().astype(np.float64)
        logits = logits[:, self._column_order]
        shifted = logits - logits.max(axis=1, keepdims=True)
        exps = np.exp(shifted)
        return exps / exps.sum(axis=1, keepdims=True)


def load_backends(config: ModelConfig):
    if config.backend == "hashed":
        return HashedEmbeddingBackend(), HashedNliBackend()
    return (
        SentenceEmbeddingBackend(config.embed_model, config.device),
        CrossEncoderNliBackend(config.nli_model, config.device),
    )


def normalize_rows(rows: np.ndarray) -> np.ndarray:
    norms = np.sqrt((rows * rows).sum(axis=1, keepdims=True))
    norms[norms == 0.0] = 1.0
    return rows / norms
