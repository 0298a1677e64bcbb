"""Entity annotation: a deterministic gazetteer linker and a client adapter
for an external wikification service.

Both backends share one contract: mentions sorted by start offset, scores in
[0, 1], everything below the configured threshold dropped, and overlapping
candidate spans resolved longest-match-first (ties to the leftmost).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import LinkerUnavailable, MalformedGazetteer, MalformedResponse
from .store import EntityRef
from .text import fold, fold_with_offsets


@dataclass(frozen=True)
class EntityMention:
    """A scored occurrence of an entity in a text span."""

    entity: EntityRef
    surface: str
    start: int
    end: int
    score: float

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span [{self.start}, {self.end})")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class LinkerConfig:
    threshold: float = 0.80
    language: str = "el"

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")


def resolve_overlaps(candidates: list[EntityMention]) -> list[EntityMention]:
    """Longest-match-first, ties to the leftmost; result sorted by start."""
    accepted: list[EntityMention] = []
    for cand in sorted(candidates, key=lambda m: (-(m.end - m.start), m.start)):
        if all(cand.end <= kept.start or cand.start >= kept.end for kept in accepted):
            accepted.append(cand)
    accepted.sort(key=lambda m: (m.start, m.end))
    return accepted


class Gazetteer:
    """Alias table linker; matches are exact on case/accent-folded text at
    word boundaries and always score 1.0."""

    def __init__(self, aliases: dict[str, list[EntityRef]]):
        # folded alias -> targets in file order (first-listed wins)
        self._aliases = aliases

    @classmethod
    def load(cls, path: str | Path) -> "Gazetteer":
        """Read tab-separated ``alias<TAB>entity_id<TAB>label`` lines."""
        aliases: dict[str, list[EntityRef]] = {}
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise MalformedGazetteer(f"cannot read {path}: {exc}") from exc
        for line_no, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedGazetteer(f"expected 3 tab-separated fields, got {len(parts)}", line_no)
            alias, entity_id, label = (p.strip() for p in parts)
            if not alias or not entity_id:
                raise MalformedGazetteer("alias and entity_id must be non-empty", line_no)
            key = fold(alias)
            aliases.setdefault(key, []).append(EntityRef(entity_id=entity_id, label=label))
        return cls(aliases)

    def __len__(self) -> int:
        return len(self._aliases)

    def annotate(self, text: str, cfg: LinkerConfig = LinkerConfig()) -> list[EntityMention]:
        if not text:
            raise ValueError("text must be non-empty")
        folded, origins = fold_with_offsets(text)
        length = len(folded)

        def is_letter(ch: str) -> bool:
            return ch.isalpha()

        def starts_original_char(pos: int) -> bool:
            return pos == 0 or pos == length or origins[pos] != origins[pos - 1]

        candidates: list[EntityMention] = []
        for alias, targets in self._aliases.items():
            start = 0
            while True:
                idx = folded.find(alias, start)
                if idx < 0:
                    break
                end = idx + len(alias)
                boundary_ok = (
                    (idx == 0 or not is_letter(folded[idx - 1]))
                    and (end == length or not is_letter(folded[end]))
                    and starts_original_char(idx)
                    and starts_original_char(end)
                )
                if boundary_ok:
                    o_start = origins[idx]
                    o_end = origins[end - 1] + 1
                    candidates.append(
                        EntityMention(
                            entity=targets[0],
                            surface=text[o_start:o_end],
                            start=o_start,
                            end=o_end,
                            score=1.0,
                        )
                    )
                start = idx + 1

        kept = [m for m in candidates if m.score >= cfg.threshold]
        return resolve_overlaps(kept)


class WikifierClient:
    """Adapter for a pagerank-style wikification web API.

    The service is expected to answer a JSON POST of ``{"text", "lang",
    "key"?}`` with ``{"annotations": [{"wikiDataItemId", "title", "pageRank",
    "support": [{"chFrom", "chTo"}]}]}`` where chFrom/chTo are inclusive
    character offsets. Raw scores are clamped into [0, 1] and thresholded.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        api_key: str | None = None,
        timeout: float = 15.0,
        session: requests.Session | None = None,
        max_in_flight: int = 4,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout
        self._session = session or requests.Session()
        self._slots = threading.Semaphore(max_in_flight)

    def annotate(self, text: str, cfg: LinkerConfig = LinkerConfig()) -> list[EntityMention]:
        if not text:
            raise ValueError("text must be non-empty")
        payload = {"text": text, "lang": cfg.language}
        if self.api_key:
            payload["key"] = self.api_key
        with self._slots:
            try:
                resp = self._session.post(self.endpoint, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                raise LinkerUnavailable(f"wikifier at {self.endpoint} unreachable: {exc}") from exc
        if resp.status_code >= 500:
            raise LinkerUnavailable(f"wikifier answered {resp.status_code}")
        if resp.status_code != 200:
            raise MalformedResponse(f"wikifier answered {resp.status_code}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise MalformedResponse(f"wikifier response is not JSON: {exc}") from exc
        return parse_wikifier_response(body, text, cfg)


def parse_wikifier_response(body: dict, text: str, cfg: LinkerConfig) -> list[EntityMention]:
    if not isinstance(body, dict) or not isinstance(body.get("annotations"), list):
        raise MalformedResponse("missing 'annotations' list")
    candidates: list[EntityMention] = []
    for ann in body["annotations"]:
        try:
            entity_id = ann["wikiDataItemId"]
            label = ann.get("title", "")
            raw = float(ann.get("pageRank", 0.0))
            supports = ann.get("support", [])
        except (TypeError, KeyError) as exc:
            raise MalformedResponse(f"bad annotation object: {exc}") from exc
        if not entity_id:
            continue
        score = min(1.0, max(0.0, raw))
        ref = EntityRef(entity_id=entity_id, label=label)
        for span in supports:
            try:
                start = int(span["chFrom"])
                end = int(span["chTo"]) + 1
            except (TypeError, KeyError, ValueError) as exc:
                raise MalformedResponse(f"bad support span: {exc}") from exc
            if not 0 <= start < end <= len(text):
                raise MalformedResponse(f"span [{start}, {end}) outside text")
            candidates.append(
                EntityMention(entity=ref, surface=text[start:end], start=start, end=end, score=score)
            )
    kept = [m for m in candidates if m.score >= cfg.threshold]
    return resolve_overlaps(kept)
