"""Candidate evidence construction: claim entities -> alternating paths ->
deduplicated concatenated section sequences, with a single-section fallback
for claims whose entities cannot be connected.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyEntitySet
from .linking import LinkerConfig
from .store import EntityRef, GraphStore, SectionId

PATH = "path"
FALLBACK = "fallback"

DEFAULT_CANDIDATE_CAP = 256


@dataclass(frozen=True)
class CandidateEvidence:
    """Concatenated section texts to be weighed against a claim."""

    text: str
    sections: tuple[SectionId, ...]
    entities: tuple[EntityRef, ...]
    hop_count: int
    origin: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("candidate text must be non-empty")
        if not self.sections:
            raise ValueError("candidate must cover at least one section")
        if self.origin not in (PATH, FALLBACK):
            raise ValueError(f"bad origin {self.origin!r}")
        if self.origin == FALLBACK and len(self.sections) != 1:
            raise ValueError("fallback candidates hold exactly one section")


def claim_entities(claim: str, linker, cfg: LinkerConfig = LinkerConfig()) -> list[EntityRef]:
    """Deduplicated entities mentioned in the claim, in order of first
    appearance. Propagates LinkerUnavailable from external linkers."""
    if not claim or not claim.strip():
        raise ValueError("claim must be non-empty")
    seen: set[str] = set()
    out: list[EntityRef] = []
    for mention in linker.annotate(claim, cfg):
        if mention.entity.entity_id not in seen:
            seen.add(mention.entity.entity_id)
            out.append(mention.entity)
    return out


def build_candidates(
    entities: list[EntityRef],
    store: GraphStore,
    max_hops: int | None = None,
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> list[CandidateEvidence]:
    """One candidate per deduplicated evidence path over the claim's entity
    set; when no path exists (or only one entity is given), one fallback
    candidate per section mentioning any claim entity.

    Path candidates are deduplicated by their unordered section-id set, the
    representative being the lexicographically smallest section-id sequence.
    The result is sorted by hop count descending then section-id sequence,
    and truncated at ``cap``. Invariant under permutations of ``entities``.
    """
    if not entities:
        raise EmptyEntitySet("cannot build candidates without entities")

    n = len({e.entity_id for e in entities})
    hops = max_hops if max_hops is not None else max(2, 2 * (n - 1))

    candidates: list[CandidateEvidence] = []
    if n >= 2:
        paths = store.shortest_evidence_paths(entities, hops, cap=cap)
        chosen: dict[frozenset[SectionId], tuple[SectionId, ...]] = {}
        for path in paths:
            key = frozenset(path.section_ids)
            prior = chosen.get(key)
            if prior is None or path.section_ids < prior:
                chosen[key] = path.section_ids
        covered = tuple(sorted(entities, key=lambda e: e.entity_id))
        for seq in chosen.values():
            text = " ".join(store.section_text(sid) for sid in seq)
            candidates.append(
                CandidateEvidence(
                    text=text,
                    sections=seq,
                    entities=covered,
                    hop_count=2 * (n - 1),
                    origin=PATH,
                )
            )

    if not candidates:
        mentioned: dict[SectionId, list[EntityRef]] = {}
        for entity in entities:
            for sid in store.sections_mentioning(entity):
                mentioned.setdefault(sid, []).append(entity)
        for sid, covering in mentioned.items():
            candidates.append(
                CandidateEvidence(
                    text=store.section_text(sid),
                    sections=(sid,),
                    entities=tuple(sorted(covering, key=lambda e: e.entity_id)),
                    hop_count=0,
                    origin=FALLBACK,
                )
            )

    candidates.sort(key=lambda c: (-c.hop_count, c.sections))
    return candidates[:cap]
