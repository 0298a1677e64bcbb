"""Scorer abstractions: unit-norm embeddings compared by cosine for ranking,
and logit triples softmaxed into contradiction/entailment/neutral verdicts.

Two in-process reference providers keep the pipeline fully deterministic and
model-free; real models live out of process behind the wire protocol (see
``remote``). Stub providers replay fixed score tables for tests and demos.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import DimensionMismatch, NonFiniteLogit
from .text import tokenize

if TYPE_CHECKING:
    from .evidence import CandidateEvidence

StsScore = float

# Tokens that flip assertion polarity for the reference entailment rule,
# stored accent-folded (see text.fold).
NEGATION_MARKERS = frozenset({"δεν", "μην", "οχι", "not", "no", "never"})

REFERENCE_DIM = 4096


@dataclass(frozen=True)
class Embedding:
    """Fixed-dimension unit vector."""

    values: tuple[float, ...]

    def __post_init__(self):
        norm = l2_norm(self.values)
        if abs(norm - 1.0) > 1e-3:
            raise ValueError(f"embedding norm {norm} too far from 1")

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class NliVerdict:
    """Probability triple over contradiction (c), entailment (e), neutral (n)."""

    c: float
    e: float
    n: float

    def __post_init__(self):
        for name, p in (("c", self.c), ("e", self.e), ("n", self.n)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {name}={p} outside [0, 1]")
        total = self.c + self.e + self.n
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def argmax(self) -> str | None:
        """'c', 'e' or 'n'; None when the maximum is shared."""
        best = max(self.c, self.e, self.n)
        winners = [k for k, v in (("c", self.c), ("e", self.e), ("n", self.n)) if v == best]
        return winners[0] if len(winners) == 1 else None

    def as_dict(self) -> dict:
        return {"c": self.c, "e": self.e, "n": self.n}


def l2_norm(values: Iterable[float]) -> float:
    return math.sqrt(math.fsum(v * v for v in values))


def cosine(u: Embedding, v: Embedding) -> StsScore:
    """Dot product of unit vectors, clamped to [-1, 1]."""
    if u.dim != v.dim:
        raise DimensionMismatch(f"dim {u.dim} vs {v.dim}")
    dot = math.fsum(a * b for a, b in zip(u.values, v.values))
    return min(1.0, max(-1.0, dot))


def softmax(logits: Sequence[float]) -> NliVerdict:
    """Numerically stable softmax of a (c, e, n) logit triple."""
    if len(logits) != 3:
        raise ValueError("expected exactly three logits")
    if any(not math.isfinite(l) for l in logits):
        raise NonFiniteLogit(f"non-finite logits {logits}")
    m = max(logits)
    exps = [math.exp(l - m) for l in logits]
    total = math.fsum(exps)
    c, e, n = (x / total for x in exps)
    return NliVerdict(c=c, e=e, n=n)


def token_coordinate(token: str, dim: int = REFERENCE_DIM) -> int:
    """Stable integer hash of a token into a coordinate index."""
    return zlib.crc32(token.encode("utf-8")) % dim


class EmbeddingStsProvider:
    """Base for providers that expose embed(); similarity is embed + cosine."""

    def embed(self, texts: Sequence[str]) -> list[Embedding]:
        raise NotImplementedError

    def scores(self, claim: str, texts: Sequence[str]) -> list[StsScore]:
        embeddings = self.embed([claim, *texts])
        head = embeddings[0]
        return [cosine(head, emb) for emb in embeddings[1:]]


class ReferenceStsProvider(EmbeddingStsProvider):
    """Hashed bag-of-tokens embeddings: fold, split on non-letters, hash each
    token into one of ``dim`` coordinates with count semantics, L2-normalize.

    Deterministic across runs and platforms; not a semantic model. A text
    with no letter tokens maps to the reserved coordinate 0.
    """

    def __init__(self, dim: int = REFERENCE_DIM):
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> list[Embedding]:
        if not texts:
            raise ValueError("texts must be non-empty")
        out = []
        for text in texts:
            if not text:
                raise ValueError("each text must be non-empty")
            counts: dict[int, int] = {}
            for token in tokenize(text):
                idx = token_coordinate(token, self.dim)
                counts[idx] = counts.get(idx, 0) + 1
            if not counts:
                counts[0] = 1
            norm = math.sqrt(math.fsum(float(c * c) for _, c in sorted(counts.items())))
            vec = [0.0] * self.dim
            for idx, count in sorted(counts.items()):
                vec[idx] = count / norm
            out.append(Embedding(values=tuple(vec)))
        return out


class ReferenceNliProvider:
    """Deterministic rule-based entailment:

    containment  := every hypothesis content token occurs in the premise
                    (content tokens exclude the negation markers)
    mismatch     := premise and hypothesis differ in negation-marker parity
    logits       := e = 4*containment*(1-mismatch), c = 4*containment*mismatch,
                    n = 2*(1-containment)
    """

    def logits(self, premise: str, hypothesis: str) -> tuple[float, float, float]:
        p_tokens = tokenize(premise)
        h_tokens = tokenize(hypothesis)
        p_negs = sum(1 for t in p_tokens if t in NEGATION_MARKERS)
        h_negs = sum(1 for t in h_tokens if t in NEGATION_MARKERS)
        p_content = {t for t in p_tokens if t not in NEGATION_MARKERS}
        h_content = {t for t in h_tokens if t not in NEGATION_MARKERS}
        containment = 1.0 if h_content <= p_content else 0.0
        mismatch = 1.0 if (p_negs % 2) != (h_negs % 2) else 0.0
        return (
            4.0 * containment * mismatch,
            4.0 * containment * (1.0 - mismatch),
            2.0 * (1.0 - containment),
        )

    def verdict(self, premise: str, hypothesis: str) -> NliVerdict:
        return softmax(self.logits(premise, hypothesis))


class StubStsProvider:
    """Replays a fixed text -> similarity table; unknown texts get ``default``."""

    def __init__(self, table: dict[str, float], default: float = 0.0):
        self.table = dict(table)
        self.default = default

    def scores(self, claim: str, texts: Sequence[str]) -> list[StsScore]:
        return [self.table.get(t, self.default) for t in texts]


class StubNliProvider:
    """Replays fixed (c, e, n) triples keyed by (premise, hypothesis) pairs,
    falling back to a premise-only key, then to the uniform triple."""

    def __init__(self, table: dict, default: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)):
        self.table = dict(table)
        self.default = default

    def verdict(self, premise: str, hypothesis: str) -> NliVerdict:
        triple = self.table.get((premise, hypothesis), self.table.get(premise, self.default))
        c, e, n = triple
        return NliVerdict(c=c, e=e, n=n)


def rank(
    claim: str,
    candidates: Sequence["CandidateEvidence"],
    provider,
) -> list[tuple["CandidateEvidence", StsScore]]:
    """Candidates with similarity scores, best first.

    Ties break toward fewer sections, then the lexicographically smaller
    section-id sequence, so ranking is stable across runs.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    scores = provider.scores(claim, [c.text for c in candidates])
    scored = list(zip(candidates, scores))
    scored.sort(key=lambda pair: (-pair[1], len(pair[0].sections), pair[0].sections))
    return scored


def nli(premise: str, hypothesis: str, provider) -> NliVerdict:
    """Provider verdict for an evidence (premise) / claim (hypothesis) pair."""
    if not premise or not hypothesis:
        raise ValueError("premise and hypothesis must be non-empty")
    return provider.verdict(premise, hypothesis)
