"""End-to-end claim evaluation: entities -> candidate evidence -> similarity
ranking -> entailment verdict on the best candidate.

Evaluation never raises on empty results; it degrades to a status so a
service built on top can answer every query.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import LinkerUnavailable, ProviderUnavailable
from .evidence import CandidateEvidence, build_candidates, claim_entities
from .linking import LinkerConfig
from .scoring import NliVerdict, StsScore, nli, rank
from .store import EntityRef, GraphStore

STATUS_OK = "ok"
STATUS_NO_ENTITIES = "no_entities"
STATUS_NO_EVIDENCE = "no_evidence"
STATUS_LINKER_UNAVAILABLE = "linker_unavailable"
STATUS_PROVIDER_UNAVAILABLE = "provider_unavailable"


@dataclass(frozen=True)
class EvaluationLimits:
    top_k: int = 10
    nli_top_k: int = 1
    max_candidates: int = 256
    max_hops: int | None = None

    def __post_init__(self):
        if self.top_k < 1 or self.nli_top_k < 1 or self.max_candidates < 1:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class RankedCandidate:
    candidate: CandidateEvidence
    sts: StsScore
    verdict: NliVerdict | None = None


@dataclass
class ClaimEvaluation:
    claim: str
    status: str
    entities: list[EntityRef] = field(default_factory=list)
    best: CandidateEvidence | None = None
    sts: StsScore | None = None
    verdict: NliVerdict | None = None
    all_candidates: list[RankedCandidate] = field(default_factory=list)

    def as_dict(self) -> dict:
        """JSON-ready view with stable field order."""
        return {
            "claim": self.claim,
            "status": self.status,
            "entities": [
                {"entity_id": e.entity_id, "label": e.label} for e in self.entities
            ],
            "best": _candidate_dict(self.best) if self.best else None,
            "sts": self.sts,
            "verdict": self.verdict.as_dict() if self.verdict else None,
            "candidates": [
                {
                    **_candidate_dict(rc.candidate),
                    "sts": rc.sts,
                    "verdict": rc.verdict.as_dict() if rc.verdict else None,
                }
                for rc in self.all_candidates
            ],
        }


def _candidate_dict(cand: CandidateEvidence) -> dict:
    return {
        "sections": list(cand.sections),
        "text": cand.text,
        "origin": cand.origin,
        "hop_count": cand.hop_count,
        "entities": [e.entity_id for e in cand.entities],
    }


def evaluate_claim(
    claim: str,
    store: GraphStore,
    linker,
    sts_provider,
    nli_provider,
    linker_cfg: LinkerConfig = LinkerConfig(),
    limits: EvaluationLimits = EvaluationLimits(),
) -> ClaimEvaluation:
    """Run the full evaluation for one claim against a consistent store view.

    The best-ranked candidate is the premise and the claim the hypothesis;
    the verdict is computed for the single best candidate unless
    ``limits.nli_top_k`` asks for more. The store is never mutated.
    """
    if not claim or not claim.strip():
        raise ValueError("claim must be non-empty")

    with store.read_view():
        try:
            entities = claim_entities(claim, linker, linker_cfg)
        except LinkerUnavailable:
            return ClaimEvaluation(claim=claim, status=STATUS_LINKER_UNAVAILABLE)
        if not entities:
            return ClaimEvaluation(claim=claim, status=STATUS_NO_ENTITIES)

        candidates = build_candidates(
            entities, store, max_hops=limits.max_hops, cap=limits.max_candidates
        )
        if not candidates:
            return ClaimEvaluation(claim=claim, status=STATUS_NO_EVIDENCE, entities=entities)

        try:
            scored = rank(claim, candidates, sts_provider)
            head, head_score = scored[0]
            verdicts: list[NliVerdict | None] = []
            for cand, _ in scored[: limits.nli_top_k]:
                verdicts.append(nli(cand.text, claim, nli_provider))
        except ProviderUnavailable:
            return ClaimEvaluation(
                claim=claim, status=STATUS_PROVIDER_UNAVAILABLE, entities=entities
            )

    ranked = [
        RankedCandidate(
            candidate=cand,
            sts=score,
            verdict=verdicts[i] if i < len(verdicts) else None,
        )
        for i, (cand, score) in enumerate(scored[: limits.top_k])
    ]
    return ClaimEvaluation(
        claim=claim,
        status=STATUS_OK,
        entities=entities,
        best=head,
        sts=head_score,
        verdict=verdicts[0],
        all_candidates=ranked,
    )


def explain(evaluation: ClaimEvaluation) -> str:
    """Deterministic human-readable report of one evaluation."""
    lines = [
        f"claim: {evaluation.claim}",
        f"status: {evaluation.status}",
    ]
    if evaluation.entities:
        refs = ", ".join(
            f"{e.entity_id} ({e.label})" if e.label else e.entity_id for e in evaluation.entities
        )
        lines.append(f"entities: {refs}")
    else:
        lines.append("entities: none")
    if evaluation.verdict is not None:
        v = evaluation.verdict
        lines.append(
            f"verdict: contradiction={v.c:.4f} entailment={v.e:.4f} neutral={v.n:.4f}"
        )
    if evaluation.best is not None:
        lines.append(
            f"best: sts={evaluation.sts:.4f} origin={evaluation.best.origin}"
            f" sections={','.join(evaluation.best.sections)}"
        )
    lines.append(f"candidates: {len(evaluation.all_candidates)}")
    for i, rc in enumerate(evaluation.all_candidates, start=1):
        lines.append(
            f"  {i}. sts={rc.sts:.4f} hops={rc.candidate.hop_count}"
            f" sections={','.join(rc.candidate.sections)} text={rc.candidate.text}"
        )
    return "\n".join(lines) + "\n"
