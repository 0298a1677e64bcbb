from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimgraph import (
    ArticleRecord,
    EmptyArticle,
    GraphStore,
    IoFailure,
    SegmentationConfig,
    ingest_file,
    segment,
)
from claimgraph.ingest import parse_record
from claimgraph.errors import MalformedRecord

from conftest import write_jsonl


def test_segment_one_split_per_terminator():
    record = ArticleRecord(url="u", title="T", body="A. B!")
    assert segment(record, SegmentationConfig(min_section_chars=1)) == ["T", "A.", "B!"]


def test_segment_short_fragments_merge_into_preceding():
    # default min_section_chars=3 folds the two-character fragments together
    record = ArticleRecord(url="u", title="T", body="A. B!")
    assert segment(record) == ["T", "A. B!"]


def test_segment_no_terminator_is_single_section():
    record = ArticleRecord(url="u", title="", body="Single sentence")
    assert segment(record) == ["Single sentence"]


def test_segment_greek_question_mark():
    body = "Η Δανία στηρίζει την πρόταση. Ποιος διαφωνεί; Η απάντηση έρχεται αύριο."
    record = ArticleRecord(url="u", title="", body=body)
    # hand-segmented oracle of the fixture text
    assert segment(record) == [
        "Η Δανία στηρίζει την πρόταση.",
        "Ποιος διαφωνεί;",
        "Η απάντηση έρχεται αύριο.",
    ]


def test_segment_title_is_section_zero():
    record = ArticleRecord(url="u", title="  Headline  ", body="Body one. Body two.")
    sections = segment(record)
    assert sections[0] == "Headline"
    assert sections[1:] == ["Body one.", "Body two."]


def test_segment_rejects_empty_article():
    with pytest.raises(EmptyArticle):
        segment(ArticleRecord(url="u", title="", body="   "))


def test_segment_abbreviation_merges():
    record = ArticleRecord(url="u", title="", body="Dr. Smith arrived early. He left.")
    assert segment(record, SegmentationConfig(min_section_chars=4)) == [
        "Dr. Smith arrived early.",
        "He left.",
    ]


@st.composite
def articles(draw):
    alphabet = st.sampled_from(list("abcδγ .!?;\n\t"))
    title = draw(st.text(alphabet=alphabet, max_size=20))
    body = draw(st.text(alphabet=alphabet, max_size=80))
    if not (title.strip() or body.strip()):
        body = body + "x"
    return ArticleRecord(url="u", title=title, body=body)


@settings(max_examples=150, deadline=None)
@given(articles(), st.integers(min_value=1, max_value=6))
def test_segment_properties(record, min_chars):
    cfg = SegmentationConfig(min_section_chars=min_chars)
    sections = segment(record, cfg)
    # pure function
    assert sections == segment(record, cfg)
    # no empty sections, all trimmed
    assert all(s and s == s.strip() for s in sections)
    # non-whitespace characters reproduced in order
    joined = " ".join(sections)
    assert "".join(joined.split()) == "".join((record.title + " " + record.body).split())


def test_parse_record_errors():
    with pytest.raises(MalformedRecord):
        parse_record("{not json", 1)
    with pytest.raises(MalformedRecord):
        parse_record(json.dumps({"title": "t", "body": "b"}), 2)
    with pytest.raises(MalformedRecord):
        parse_record(json.dumps({"url": "u", "title": " ", "body": ""}), 3)
    exc = None
    try:
        parse_record("[]", 7)
    except MalformedRecord as e:
        exc = e
    assert exc is not None and exc.line_no == 7


def test_ingest_file_counts(tmp_path):
    path = write_jsonl(
        tmp_path / "corpus.jsonl",
        [
            {"url": "http://a", "title": "First", "body": "One. Two."},
            {"url": "http://b", "title": "Second", "body": "Three."},
        ],
    )
    store = GraphStore()
    stats = ingest_file(path, store)
    assert stats.articles == 2
    assert stats.sections >= 2
    assert stats.skipped == 0
    assert store.stats().articles == 2


def test_ingest_is_idempotent_per_url(tmp_path):
    path = write_jsonl(
        tmp_path / "corpus.jsonl",
        [{"url": "http://a", "title": "First", "body": "One. Two."}],
    )
    store = GraphStore()
    ingest_file(path, store)
    first = store.stats()
    again = ingest_file(path, store)
    assert again.articles == 0
    assert again.sections == 0
    assert store.stats() == first


def test_ingest_skips_malformed_lines(tmp_path):
    path = tmp_path / "corpus.jsonl"
    good = json.dumps({"url": "http://a", "title": "Ok", "body": "Fine."})
    path.write_text(good + "\n{broken\n", encoding="utf-8")
    store = GraphStore()
    stats = ingest_file(path, store)
    assert stats.articles == 1
    assert stats.skipped == 1


def test_ingest_missing_file_is_io_failure(tmp_path):
    with pytest.raises(IoFailure):
        ingest_file(tmp_path / "absent.jsonl", GraphStore())


def test_reingest_replaces_sections(tmp_path):
    store = GraphStore()
    write_jsonl(tmp_path / "v1.jsonl", [{"url": "u", "title": "T", "body": "One. Two. Three."}])
    write_jsonl(tmp_path / "v2.jsonl", [{"url": "u", "title": "T", "body": "Only."}])
    ingest_file(tmp_path / "v1.jsonl", store)
    assert store.stats().sections == 4
    stats = ingest_file(tmp_path / "v2.jsonl", store)
    assert store.stats().sections == 2
    assert stats.articles == 0
    assert stats.sections == -2


def test_section_order_stable_across_reingest(tmp_path):
    store = GraphStore()
    row = {"url": "u", "title": "T", "body": "One. Two."}
    write_jsonl(tmp_path / "c.jsonl", [row])
    ingest_file(tmp_path / "c.jsonl", store)
    first = store.article_sections("u")
    ingest_file(tmp_path / "c.jsonl", store)
    assert store.article_sections("u") == first
    texts = [store.section_text(sid) for sid in first]
    assert texts == ["T", "One.", "Two."]
