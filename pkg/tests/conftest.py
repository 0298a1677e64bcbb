from __future__ import annotations

import json
import random

import pytest

from claimgraph import (
    ArticleRecord,
    EntityMention,
    EntityRef,
    GraphStore,
    SegmentationConfig,
    segment,
)


def mention(entity_id: str, label: str = "", score: float = 1.0) -> EntityMention:
    return EntityMention(
        entity=EntityRef(entity_id=entity_id, label=label or entity_id),
        surface="x",
        start=0,
        end=1,
        score=score,
    )


def build_store(articles: dict[str, list[str]], mentions: dict[str, set[str]] | None = None):
    """Store from {url: [section texts]} plus {section_id: {entity ids}}.

    Section ids follow upsert order per article; the returned map translates
    a friendly handle 'url#i' to the real section id.
    """
    store = GraphStore()
    handles: dict[str, str] = {}
    for url, sections in articles.items():
        store.upsert_article(ArticleRecord(url=url, title="", body="x"), sections)
        for i, sid in enumerate(store.article_sections(url)):
            handles[f"{url}#{i}"] = sid
    if mentions:
        for handle, eids in mentions.items():
            sid = handles.get(handle, handle)
            for eid in eids:
                store.attach_entity(sid, mention(eid))
    return store, handles


def random_graph(rng: random.Random, max_entities: int = 12, max_sections: int = 30):
    """Random mention map for path-oracle comparisons.

    Returns (store, mention_map keyed by real section ids, entity ids).
    """
    n_entities = rng.randint(2, max_entities)
    n_sections = rng.randint(1, max_sections)
    entity_ids = [f"E{i}" for i in range(n_entities)]
    store = GraphStore()
    mention_map: dict[str, set[str]] = {}
    for s in range(n_sections):
        url = f"u{s}"
        store.upsert_article(ArticleRecord(url=url, title="", body="x"), [f"text {s}"])
        sid = store.article_sections(url)[0]
        k = rng.randint(0, min(4, n_entities))
        chosen = rng.sample(entity_ids, k)
        mention_map[sid] = set(chosen)
        for eid in chosen:
            store.attach_entity(sid, mention(eid))
    # entities that never got a section still exist in queries; register them
    for eid in entity_ids:
        if not any(eid in es for es in mention_map.values()):
            # attach and detach is not supported; leave unknown to the store
            pass
    return store, mention_map, entity_ids


@pytest.fixture
def chain_graph():
    """Three entities chained by two sections: s1 mentions {A, B}, s2 {B, C}."""
    store, handles = build_store(
        {"u1": ["alpha beta news.", "beta gamma news."]},
        {"u1#0": {"A", "B"}, "u1#1": {"B", "C"}},
    )
    return store, handles["u1#0"], handles["u1#1"]


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path
