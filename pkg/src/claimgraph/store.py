"""Embedded property graph: Article, Section and Entity nodes joined by
HAS_SECTION and HAS_ENTITY edges, with alternating-path queries and a
checksummed single-file snapshot format.

Concurrency: many concurrent readers or one exclusive writer. The write lock
is reentrant per thread so bulk operations can wrap the per-article ones.
"""

from __future__ import annotations

import hashlib
import json
import struct
import threading
import zlib
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

from .errors import CorruptSnapshot, EmptySections, IoFailure, UnknownEntity, UnknownSection

if TYPE_CHECKING:
    from .ingest import ArticleRecord
    from .linking import EntityMention

SNAPSHOT_MAGIC = b"FFGRAPH1"

ArticleId = str
SectionId = str


@dataclass(frozen=True)
class EntityRef:
    """A knowledge-base concept, identified by e.g. a WikiData Q-id."""

    entity_id: str
    label: str = ""
    types: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.entity_id:
            raise ValueError("entity_id must be non-empty")


@dataclass(frozen=True)
class EvidencePath:
    """Alternating entity-section path; entities at both ends, one section
    between each consecutive entity pair, no section repeated."""

    entities: tuple[EntityRef, ...]
    section_ids: tuple[SectionId, ...]

    def __post_init__(self):
        if len(self.entities) < 2:
            raise ValueError("a path joins at least two entities")
        if len(self.section_ids) != len(self.entities) - 1:
            raise ValueError("alternation requires exactly n-1 sections for n entities")
        if len(set(self.section_ids)) != len(self.section_ids):
            raise ValueError("a section may appear only once in a path")

    @property
    def hop_count(self) -> int:
        return 2 * (len(self.entities) - 1)

    @property
    def nodes(self) -> tuple:
        """Interleaved view: [e1, s_a, e2, ..., s_k, en]."""
        out: list = []
        for i, ent in enumerate(self.entities):
            out.append(ent)
            if i < len(self.section_ids):
                out.append(self.section_ids[i])
        return tuple(out)


@dataclass(frozen=True)
class GraphStats:
    articles: int = 0
    sections: int = 0
    entities: int = 0
    mention_edges: int = 0

    def as_dict(self) -> dict:
        return {
            "articles": self.articles,
            "sections": self.sections,
            "entities": self.entities,
            "mention_edges": self.mention_edges,
        }


@dataclass
class _ArticleNode:
    url: str
    title: str = ""
    published_at: str | None = None
    author: str | None = None
    source: str | None = None


@dataclass
class _SectionNode:
    article_id: ArticleId
    ordinal: int
    text: str


class _RWLock:
    """Readers-writer lock; the write side is reentrant per owning thread."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer: int | None = None
        self._write_depth = 0

    @contextmanager
    def read(self):
        self.acquire_read()
        try:
            yield
        finally:
            self.release_read()

    @contextmanager
    def write(self):
        self.acquire_write()
        try:
            yield
        finally:
            self.release_write()

    def acquire_read(self):
        me = threading.get_ident()
        with self._cond:
            while self._writer is not None and self._writer != me:
                self._cond.wait()
            self._readers += 1

    def release_read(self):
        with self._cond:
            self._readers -= 1
            self._cond.notify_all()

    def acquire_write(self):
        me = threading.get_ident()
        with self._cond:
            if self._writer == me:
                self._write_depth += 1
                return
            while self._writer is not None or self._readers > 0:
                self._cond.wait()
            self._writer = me
            self._write_depth = 1

    def try_acquire_write(self) -> bool:
        me = threading.get_ident()
        with self._cond:
            if self._writer == me:
                self._write_depth += 1
                return True
            if self._writer is not None or self._readers > 0:
                return False
            self._writer = me
            self._write_depth = 1
            return True

    def release_write(self):
        with self._cond:
            self._write_depth -= 1
            if self._write_depth == 0:
                self._writer = None
                self._cond.notify_all()


def article_id_for_url(url: str) -> ArticleId:
    return hashlib.sha1(url.encode("utf-8")).hexdigest()[:12]


def _section_id(article_id: ArticleId, ordinal: int) -> SectionId:
    return f"{article_id}:{ordinal:04d}"


class GraphStore:
    """In-memory property graph with snapshot persistence."""

    def __init__(self):
        self._lock = _RWLock()
        self._articles: dict[ArticleId, _ArticleNode] = {}
        self._url_index: dict[str, ArticleId] = {}
        self._article_sections: dict[ArticleId, list[SectionId]] = {}
        self._sections: dict[SectionId, _SectionNode] = {}
        self._entities: dict[str, EntityRef] = {}
        self._section_entities: dict[SectionId, dict[str, float]] = {}
        self._entity_sections: dict[str, dict[SectionId, float]] = {}

    # -- locking surface ---------------------------------------------------

    @contextmanager
    def exclusive_writer(self):
        """Hold the write lock across a bulk mutation (e.g. a file ingest)."""
        with self._lock.write():
            yield self

    @contextmanager
    def read_view(self):
        """Hold the read lock across several queries for a consistent view."""
        with self._lock.read():
            yield self

    def try_exclusive_writer(self):
        """Non-blocking write acquisition; returns a release callable or None."""
        if not self._lock.try_acquire_write():
            return None
        return self._lock.release_write

    # -- mutation ----------------------------------------------------------

    def upsert_article(self, record: "ArticleRecord", sections: Sequence[str]) -> ArticleId:
        """Create or replace the article node for record.url together with its
        HAS_SECTION edges; prior sections and their mention edges are removed."""
        if not sections:
            raise EmptySections(f"article {record.url!r} has no sections")
        if any(not text for text in sections):
            raise EmptySections("section texts must be non-empty")
        with self._lock.write():
            aid = article_id_for_url(record.url)
            if aid in self._articles:
                self._remove_article_locked(aid)
            self._articles[aid] = _ArticleNode(
                url=record.url,
                title=record.title,
                published_at=record.published_at,
                author=record.author,
                source=record.source,
            )
            self._url_index[record.url] = aid
            sids: list[SectionId] = []
            for ordinal, text in enumerate(sections):
                sid = _section_id(aid, ordinal)
                self._sections[sid] = _SectionNode(article_id=aid, ordinal=ordinal, text=text)
                sids.append(sid)
            self._article_sections[aid] = sids
            return aid

    def _remove_article_locked(self, aid: ArticleId):
        for sid in self._article_sections.get(aid, []):
            for eid in self._section_entities.pop(sid, {}):
                bucket = self._entity_sections.get(eid)
                if bucket is not None:
                    bucket.pop(sid, None)
            self._sections.pop(sid, None)
        node = self._articles.pop(aid, None)
        if node is not None:
            self._url_index.pop(node.url, None)
        self._article_sections.pop(aid, None)

    def attach_entity(self, section: SectionId, mention: "EntityMention") -> None:
        """Upsert the entity node and record a HAS_ENTITY edge carrying the
        mention score; duplicate (section, entity) edges keep the max score."""
        if not 0.0 <= mention.score <= 1.0:
            raise ValueError(f"mention score {mention.score} outside [0, 1]")
        with self._lock.write():
            if section not in self._sections:
                raise UnknownSection(f"no section {section!r}")
            ref = mention.entity
            self._entities[ref.entity_id] = ref
            prior = self._section_entities.setdefault(section, {}).get(ref.entity_id)
            score = mention.score if prior is None else max(prior, mention.score)
            self._section_entities[section][ref.entity_id] = score
            self._entity_sections.setdefault(ref.entity_id, {})[section] = score

    # -- queries -----------------------------------------------------------

    def stats(self) -> GraphStats:
        with self._lock.read():
            return GraphStats(
                articles=len(self._articles),
                sections=len(self._sections),
                entities=len(self._entities),
                mention_edges=sum(len(v) for v in self._section_entities.values()),
            )

    def section_text(self, section: SectionId) -> str:
        with self._lock.read():
            node = self._sections.get(section)
            if node is None:
                raise UnknownSection(f"no section {section!r}")
            return node.text

    def iter_sections(self) -> list[tuple[SectionId, str]]:
        """All (section id, text) pairs in deterministic id order."""
        with self._lock.read():
            return [(sid, self._sections[sid].text) for sid in sorted(self._sections)]

    def entity(self, entity_id: str) -> EntityRef | None:
        with self._lock.read():
            return self._entities.get(entity_id)

    def article_sections(self, url: str) -> list[SectionId]:
        with self._lock.read():
            aid = self._url_index.get(url)
            return list(self._article_sections.get(aid, [])) if aid else []

    def sections_mentioning(self, entity: EntityRef | str) -> list[SectionId]:
        """Sections with a HAS_ENTITY edge to the entity, sorted by section id;
        an unknown entity yields an empty list."""
        eid = entity.entity_id if isinstance(entity, EntityRef) else entity
        with self._lock.read():
            return sorted(self._entity_sections.get(eid, {}))

    def section_entity_scores(self, section: SectionId) -> dict[str, float]:
        with self._lock.read():
            return dict(self._section_entities.get(section, {}))

    def shortest_evidence_paths(
        self,
        entities: Sequence[EntityRef | str],
        max_hops: int,
        *,
        cap: int = 256,
        strict: bool = False,
    ) -> list[EvidencePath]:
        """Every minimum-length alternating path covering the given entity set.

        All orderings of the set are explored; consecutive entities must share
        a section, so every returned path has hop_count = 2(n-1). A path and
        its reversal count once, and paths identical as section-id sequences
        are deduplicated. Results are sorted by section-id sequence and
        truncated at ``cap``. Entity ids absent from the store yield no paths
        unless ``strict`` is set, in which case UnknownEntity is raised.
        """
        ids = []
        seen: set[str] = set()
        for ent in entities:
            eid = ent.entity_id if isinstance(ent, EntityRef) else ent
            if eid not in seen:
                seen.add(eid)
                ids.append(eid)
        if len(ids) < 2:
            raise ValueError("a path query needs at least two distinct entities")
        if max_hops < 2:
            raise ValueError("max_hops must be >= 2")

        with self._lock.read():
            for eid in ids:
                if eid not in self._entities:
                    if strict:
                        raise UnknownEntity(f"no entity {eid!r}")
                    return []
            n = len(ids)
            if 2 * (n - 1) > max_hops:
                return []
            return self._enumerate_paths_locked(sorted(ids), cap)

    def _shared_sections_locked(self, a: str, b: str) -> list[SectionId]:
        sa = self._entity_sections.get(a, {})
        sb = self._entity_sections.get(b, {})
        if len(sb) < len(sa):
            sa, sb = sb, sa
        return sorted(s for s in sa if s in sb)

    def _enumerate_paths_locked(self, ids: list[str], cap: int) -> list[EvidencePath]:
        n = len(ids)
        # canonical section sequence -> smallest entity-id sequence seen for it
        found: dict[tuple[SectionId, ...], tuple[str, ...]] = {}

        def extend(entity_seq: list[str], section_seq: list[SectionId], remaining: set[str]):
            if not remaining:
                seq = tuple(section_seq)
                ents = tuple(entity_seq)
                rev = seq[::-1]
                if rev < seq or (rev == seq and ents[::-1] < ents):
                    seq, ents = rev, ents[::-1]
                best = found.get(seq)
                if best is None or ents < best:
                    found[seq] = ents
                return
            current = entity_seq[-1]
            for nxt in sorted(remaining):
                for sid in self._shared_sections_locked(current, nxt):
                    if sid in section_seq:
                        continue
                    entity_seq.append(nxt)
                    section_seq.append(sid)
                    remaining.discard(nxt)
                    extend(entity_seq, section_seq, remaining)
                    remaining.add(nxt)
                    section_seq.pop()
                    entity_seq.pop()

        for start in ids:
            extend([start], [], set(ids) - {start})

        paths = [
            EvidencePath(
                entities=tuple(self._entities[eid] for eid in found[seq]),
                section_ids=seq,
            )
            for seq in sorted(found)
        ]
        return paths[:cap]

    # -- snapshots -----------------------------------------------------------

    def _tables(self) -> list[list[dict]]:
        articles = [
            {
                "id": aid,
                "url": node.url,
                "title": node.title,
                "published_at": node.published_at,
                "author": node.author,
                "source": node.source,
            }
            for aid, node in sorted(self._articles.items())
        ]
        sections = [
            {"id": sid, "text": node.text} for sid, node in sorted(self._sections.items())
        ]
        entities = [
            {"id": eid, "label": ref.label, "types": list(ref.types)}
            for eid, ref in sorted(self._entities.items())
        ]
        has_section = [
            {"article": aid, "section": sid, "ordinal": i}
            for aid, sids in sorted(self._article_sections.items())
            for i, sid in enumerate(sids)
        ]
        has_entity = [
            {"section": sid, "entity": eid, "score": score}
            for sid, bucket in sorted(self._section_entities.items())
            for eid, score in sorted(bucket.items())
        ]
        return [articles, sections, entities, has_section, has_entity]

    def save_snapshot(self, path: str | Path) -> GraphStats:
        """Write the versioned, CRC-32 checksummed snapshot file."""
        with self._lock.read():
            blob = bytearray(SNAPSHOT_MAGIC)
            for table in self._tables():
                payload = json.dumps(table, ensure_ascii=False, sort_keys=True).encode("utf-8")
                blob += struct.pack(">I", len(payload))
                blob += payload
            blob += struct.pack(">I", zlib.crc32(bytes(blob)) & 0xFFFFFFFF)
            try:
                Path(path).write_bytes(bytes(blob))
            except OSError as exc:
                raise IoFailure(f"cannot write snapshot {path}: {exc}") from exc
            return self.stats()

    @classmethod
    def load_snapshot(cls, path: str | Path) -> "GraphStore":
        try:
            blob = Path(path).read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read snapshot {path}: {exc}") from exc
        if len(blob) < len(SNAPSHOT_MAGIC) + 4:
            raise CorruptSnapshot("snapshot truncated")
        if blob[: len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
            raise CorruptSnapshot("bad magic bytes")
        body, crc_bytes = blob[:-4], blob[-4:]
        expected = struct.unpack(">I", crc_bytes)[0]
        if zlib.crc32(body) & 0xFFFFFFFF != expected:
            raise CorruptSnapshot("checksum mismatch")

        tables: list[list[dict]] = []
        offset = len(SNAPSHOT_MAGIC)
        for _ in range(5):
            if offset + 4 > len(body):
                raise CorruptSnapshot("table header truncated")
            (length,) = struct.unpack(">I", body[offset : offset + 4])
            offset += 4
            if offset + length > len(body):
                raise CorruptSnapshot("table payload truncated")
            try:
                tables.append(json.loads(body[offset : offset + length].decode("utf-8")))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise CorruptSnapshot(f"table payload invalid: {exc}") from exc
            offset += length
        if offset != len(body):
            raise CorruptSnapshot("trailing bytes after tables")

        articles, sections, entities, has_section, has_entity = tables
        store = cls()
        try:
            for row in articles:
                store._articles[row["id"]] = _ArticleNode(
                    url=row["url"],
                    title=row.get("title", ""),
                    published_at=row.get("published_at"),
                    author=row.get("author"),
                    source=row.get("source"),
                )
                store._url_index[row["url"]] = row["id"]
            texts = {row["id"]: row["text"] for row in sections}
            ordered: dict[str, list[tuple[int, str]]] = {}
            for row in has_section:
                ordered.setdefault(row["article"], []).append((row["ordinal"], row["section"]))
            for aid, pairs in ordered.items():
                sids = [sid for _, sid in sorted(pairs)]
                store._article_sections[aid] = sids
                for ordinal, sid in sorted(pairs):
                    store._sections[sid] = _SectionNode(
                        article_id=aid, ordinal=ordinal, text=texts[sid]
                    )
            for row in entities:
                store._entities[row["id"]] = EntityRef(
                    entity_id=row["id"],
                    label=row.get("label", ""),
                    types=tuple(row.get("types", [])),
                )
            for row in has_entity:
                sid, eid, score = row["section"], row["entity"], row["score"]
                if sid not in store._sections or eid not in store._entities:
                    raise KeyError(f"dangling mention edge {sid}->{eid}")
                store._section_entities.setdefault(sid, {})[eid] = score
                store._entity_sections.setdefault(eid, {})[sid] = score
        except (KeyError, TypeError) as exc:
            raise CorruptSnapshot(f"inconsistent snapshot contents: {exc}") from exc
        return store
