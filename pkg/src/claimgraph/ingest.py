"""Article ingestion: parse line-delimited records, segment text into sections,
and populate the graph store.

The ingestion format is UTF-8 JSON, one object per line, with fields
url (required), title, body, published_at, author, source.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyArticle, IoFailure, MalformedRecord
from .store import GraphStore

logger = logging.getLogger(__name__)

DEFAULT_TERMINATORS = frozenset({".", "!", "?", ";"})


@dataclass(frozen=True)
class ArticleRecord:
    """A news document; url is the unique identifier."""

    url: str
    title: str = ""
    body: str = ""
    published_at: str | None = None
    author: str | None = None
    source: str | None = None

    def __post_init__(self):
        if not self.url:
            raise ValueError("url must be non-empty")


@dataclass(frozen=True)
class SegmentationConfig:
    terminators: frozenset[str] = DEFAULT_TERMINATORS
    min_section_chars: int = 3

    def __post_init__(self):
        if not self.terminators:
            raise ValueError("terminators must be non-empty")
        if self.min_section_chars < 1:
            raise ValueError("min_section_chars must be >= 1")


@dataclass
class IngestStats:
    """Net graph deltas of one ingestion run plus the count of skipped lines."""

    articles: int = 0
    sections: int = 0
    skipped: int = 0

    def as_dict(self) -> dict:
        return {"articles": self.articles, "sections": self.sections, "skipped": self.skipped}


def segment(article: ArticleRecord, cfg: SegmentationConfig = SegmentationConfig()) -> list[str]:
    """Split an article into section texts: the title (when present) followed
    by the body cut after every sentence terminator.

    Body fragments shorter than ``cfg.min_section_chars`` are merged into the
    preceding body fragment; a short leading fragment (the abbreviation case)
    is prepended to the following one instead. Every section is stripped of
    surrounding whitespace and never empty.
    """
    if not article.title.strip() and not article.body.strip():
        raise EmptyArticle(f"article {article.url!r} has no title and no body")

    fragments: list[str] = []
    current: list[str] = []
    for ch in article.body:
        current.append(ch)
        if ch in cfg.terminators:
            fragments.append("".join(current))
            current = []
    if current:
        fragments.append("".join(current))

    stripped = [f.strip() for f in fragments]
    stripped = [f for f in stripped if f]

    merged: list[str] = []
    pending = ""
    for frag in stripped:
        if pending:
            frag = pending + " " + frag
            pending = ""
        if len(frag) >= cfg.min_section_chars:
            merged.append(frag)
        elif merged:
            merged[-1] = merged[-1] + " " + frag
        else:
            pending = frag
    if pending:
        merged.append(pending)

    sections: list[str] = []
    title = article.title.strip()
    if title:
        sections.append(title)
    sections.extend(merged)
    return sections


def parse_record(line: str, line_no: int | None = None) -> ArticleRecord:
    """Parse one ingestion-format line into an ArticleRecord."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc.msg}", line_no) from exc
    if not isinstance(obj, dict):
        raise MalformedRecord("record is not an object", line_no)
    url = obj.get("url")
    if not isinstance(url, str) or not url:
        raise MalformedRecord("missing or empty 'url'", line_no)
    title = obj.get("title") or ""
    body = obj.get("body") or ""
    if not isinstance(title, str) or not isinstance(body, str):
        raise MalformedRecord("'title' and 'body' must be strings", line_no)
    if not title.strip() and not body.strip():
        raise MalformedRecord("title and body are both empty", line_no)
    return ArticleRecord(
        url=url,
        title=title,
        body=body,
        published_at=obj.get("published_at"),
        author=obj.get("author"),
        source=obj.get("source"),
    )


def ingest_lines(
    lines,
    store: GraphStore,
    cfg: SegmentationConfig = SegmentationConfig(),
) -> IngestStats:
    """Ingest an iterable of record lines into the store.

    Idempotent per url: re-ingesting the same url replaces the article and
    its sections. Malformed lines are skipped (logged with their line number)
    and counted in ``skipped``. Stats report net graph deltas.
    """
    stats = IngestStats()
    with store.exclusive_writer():
        before = store.stats()
        for line_no, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = parse_record(line, line_no)
                sections = segment(record, cfg)
            except (MalformedRecord, EmptyArticle) as exc:
                logger.warning("skipping record: %s", exc)
                stats.skipped += 1
                continue
            store.upsert_article(record, sections)
        after = store.stats()
    stats.articles = after.articles - before.articles
    stats.sections = after.sections - before.sections
    return stats


def ingest_file(
    path: str | Path,
    store: GraphStore,
    cfg: SegmentationConfig = SegmentationConfig(),
) -> IngestStats:
    """Ingest a line-delimited record file; see ingest_lines."""
    try:
        with open(path, encoding="utf-8") as fh:
            return ingest_lines(fh, store, cfg)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
