from __future__ import annotations

import pytest

from claimgraph import (
    ArticleRecord,
    EntityRef,
    Gazetteer,
    GraphStore,
    LinkerConfig,
    LinkerUnavailable,
    ProviderUnavailable,
    ReferenceNliProvider,
    ReferenceStsProvider,
    StubNliProvider,
    StubStsProvider,
    evaluate_claim,
    explain,
)
from claimgraph.pipeline import (
    STATUS_LINKER_UNAVAILABLE,
    STATUS_NO_ENTITIES,
    STATUS_NO_EVIDENCE,
    STATUS_OK,
    STATUS_PROVIDER_UNAVAILABLE,
    EvaluationLimits,
)
from claimgraph.text import fold


def gaz(aliases: dict[str, str]) -> Gazetteer:
    table: dict[str, list[EntityRef]] = {}
    for alias, eid in aliases.items():
        table.setdefault(fold(alias), []).append(EntityRef(entity_id=eid, label=alias))
    return Gazetteer(table)


def corpus(store: GraphStore, texts: list[str], linker: Gazetteer, prefix: str = "u"):
    """One single-section article per text, annotated with the gazetteer."""
    for i, text in enumerate(texts):
        url = f"http://{prefix}/{i}"
        store.upsert_article(ArticleRecord(url=url, title="", body=text), [text])
        (sid,) = store.article_sections(url)
        for mention in linker.annotate(text, LinkerConfig()):
            store.attach_entity(sid, mention)


# -- scenario: two contradicting claims over shared candidates -------------

EVID_A = (
    "Austria and Denmark are urging stronger EU support for states hosting "
    "refugees close to crisis zones."
)
EVID_B = (
    "Police controls at airports found forged papers used to reach EU states "
    "such as Austria, Denmark and Norway."
)
CLAIM_1A = "Denmark and Austria want the European Union to give more help to refugees."
CLAIM_1B = "Denmark is at odds with Austria over European Union migration policy."

SCENARIO1_GAZ = gaz({"Denmark": "Q35", "Austria": "Q40", "European Union": "Q458"})


def scenario1_store() -> GraphStore:
    store = GraphStore()
    corpus(store, [EVID_A, EVID_B], SCENARIO1_GAZ)
    return store


def scenario1_providers():
    sts = StubStsProvider({EVID_A: 0.8505, EVID_B: 0.2283})
    nli = StubNliProvider(
        {
            (EVID_A, CLAIM_1A): (0.014, 0.958, 0.028),
            (EVID_A, CLAIM_1B): (0.951, 0.002, 0.047),
        }
    )
    return sts, nli


def test_scenario_entailed_claim():
    store = scenario1_store()
    sts, nli = scenario1_providers()
    evaluation = evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, sts, nli)
    assert evaluation.status == STATUS_OK
    assert [e.entity_id for e in evaluation.entities] == ["Q35", "Q40", "Q458"]
    # EU is never mentioned in stored sections, so candidates come from the
    # single-section fallback and both sections compete on similarity
    assert evaluation.best.origin == "fallback"
    assert evaluation.best.text == EVID_A
    assert evaluation.sts == 0.8505
    assert evaluation.verdict.argmax() == "e"
    assert evaluation.verdict.e == 0.958
    assert len(evaluation.all_candidates) == 2


def test_scenario_contradicted_claim_shares_candidates():
    store = scenario1_store()
    sts, nli = scenario1_providers()
    first = evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, sts, nli)
    second = evaluate_claim(CLAIM_1B, store, SCENARIO1_GAZ, sts, nli)
    # same entity set -> same candidate ranking; verdict flips with the claim
    assert [rc.candidate.text for rc in first.all_candidates] == [
        rc.candidate.text for rc in second.all_candidates
    ]
    assert second.verdict.argmax() == "c"
    assert second.verdict.c == 0.951


# -- scenario: a newly ingested section shifts the verdict ------------------

T1 = (
    "Iran faces a choice between accepting US demands over its nuclear "
    "program or risking collapse, a minister argued."
)
T2 = "New US sanctions on oil exports from Iran have been in force since early November."
T3 = "The US reimposes sanctions on Iran and then asks for talks, the president said on television."
T_NEW = "After the latest talks between the US and Iran collapsed, additional sanctions are expected within days."
CLAIM_2 = "The United States plans new sanctions against Iran."

SCENARIO2_GAZ = gaz({"United States": "Q30", "US": "Q30", "Iran": "Q794"})


def scenario2_providers():
    sts = StubStsProvider({T1: 0.6665, T2: 0.6324, T3: 0.5151, T_NEW: 0.7195})
    nli = StubNliProvider(
        {
            (T1, CLAIM_2): (0.170, 0.571, 0.259),
            (T_NEW, CLAIM_2): (0.012, 0.891, 0.097),
        }
    )
    return sts, nli


def test_scenario_new_evidence_shifts_verdict():
    store = GraphStore()
    corpus(store, [T1, T2, T3], SCENARIO2_GAZ)
    sts, nli = scenario2_providers()

    before = evaluate_claim(CLAIM_2, store, SCENARIO2_GAZ, sts, nli)
    assert before.status == STATUS_OK
    # both claim entities co-occur in each section: single-section paths
    assert before.best.origin == "path"
    assert before.best.text == T1
    assert before.sts == 0.6665
    assert before.verdict.e == 0.571
    assert [round(rc.sts, 4) for rc in before.all_candidates] == [0.6665, 0.6324, 0.5151]

    corpus(store, [T_NEW], SCENARIO2_GAZ, prefix="new")
    after = evaluate_claim(CLAIM_2, store, SCENARIO2_GAZ, sts, nli)
    assert after.best.text == T_NEW
    assert after.sts == 0.7195
    assert after.verdict.e == 0.891
    assert before.verdict.e < after.verdict.e


def test_monotone_evidence_property_generalized():
    # any section stubbed above the current best takes over the head
    store = GraphStore()
    corpus(store, [T1, T2], SCENARIO2_GAZ)
    table = {T1: 0.5, T2: 0.4}
    nli = ReferenceNliProvider()
    best0 = evaluate_claim(CLAIM_2, store, SCENARIO2_GAZ, StubStsProvider(table), nli).best
    assert best0.text == T1
    corpus(store, [T3], SCENARIO2_GAZ, prefix="extra")
    table[T3] = 0.9
    best1 = evaluate_claim(CLAIM_2, store, SCENARIO2_GAZ, StubStsProvider(table), nli).best
    assert best1.text == T3
    assert T3 in best1.text


# -- statuses ----------------------------------------------------------------


def test_empty_store_is_no_evidence():
    store = GraphStore()
    evaluation = evaluate_claim(
        CLAIM_1A, store, SCENARIO1_GAZ, ReferenceStsProvider(), ReferenceNliProvider()
    )
    assert evaluation.status == STATUS_NO_EVIDENCE
    assert evaluation.verdict is None
    assert evaluation.best is None
    assert evaluation.entities  # linking worked, evidence did not


def test_unknown_claim_is_no_entities():
    store = scenario1_store()
    evaluation = evaluate_claim(
        "completely unrelated words", store, SCENARIO1_GAZ, *scenario1_providers()
    )
    assert evaluation.status == STATUS_NO_ENTITIES
    assert evaluation.entities == []


def test_linker_down_status():
    class DownLinker:
        def annotate(self, text, cfg):
            raise LinkerUnavailable("down")

    evaluation = evaluate_claim(
        CLAIM_1A, scenario1_store(), DownLinker(), *scenario1_providers()
    )
    assert evaluation.status == STATUS_LINKER_UNAVAILABLE


def test_provider_down_status():
    class DownSts:
        def scores(self, claim, texts):
            raise ProviderUnavailable("down")

    evaluation = evaluate_claim(
        CLAIM_1A, scenario1_store(), SCENARIO1_GAZ, DownSts(), ReferenceNliProvider()
    )
    assert evaluation.status == STATUS_PROVIDER_UNAVAILABLE


def test_claim_must_be_non_empty():
    with pytest.raises(ValueError):
        evaluate_claim("  ", GraphStore(), SCENARIO1_GAZ, *scenario1_providers())


def test_evaluate_does_not_mutate_store():
    store = scenario1_store()
    before = store.stats()
    evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, *scenario1_providers())
    assert store.stats() == before


def test_verdict_is_pure_function_of_best_and_claim():
    store = scenario1_store()
    sts, nli = scenario1_providers()
    a = evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, sts, nli)
    b = evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, sts, nli)
    assert a.verdict == b.verdict
    assert a.as_dict() == b.as_dict()


def test_nli_top_k_annotates_more_candidates():
    store = scenario1_store()
    sts, _ = scenario1_providers()
    nli = StubNliProvider(
        {
            (EVID_A, CLAIM_1A): (0.014, 0.958, 0.028),
            (EVID_B, CLAIM_1A): (0.1, 0.2, 0.7),
        }
    )
    limits = EvaluationLimits(nli_top_k=2)
    evaluation = evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, sts, nli, limits=limits)
    assert evaluation.all_candidates[0].verdict is not None
    assert evaluation.all_candidates[1].verdict is not None
    assert evaluation.all_candidates[1].verdict.argmax() == "n"
    # default: only the head is judged
    default = evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, sts, nli)
    assert default.all_candidates[1].verdict is None


def test_top_k_truncates_candidate_list():
    store = GraphStore()
    corpus(store, [T1, T2, T3, T_NEW], SCENARIO2_GAZ)
    sts, nli = scenario2_providers()
    limits = EvaluationLimits(top_k=2)
    evaluation = evaluate_claim(CLAIM_2, store, SCENARIO2_GAZ, sts, nli, limits=limits)
    assert len(evaluation.all_candidates) == 2
    assert evaluation.best.text == T_NEW


# -- explain -----------------------------------------------------------------


def test_explain_ok_lists_candidates():
    store = scenario1_store()
    evaluation = evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, *scenario1_providers())
    report = explain(evaluation)
    assert report.count("sts=") >= len(evaluation.all_candidates)
    for rc in evaluation.all_candidates:
        assert rc.candidate.text in report


def test_explain_names_degraded_status():
    evaluation = evaluate_claim(
        "unknown words", scenario1_store(), SCENARIO1_GAZ, *scenario1_providers()
    )
    assert "no_entities" in explain(evaluation)


def test_explain_is_deterministic():
    store = scenario1_store()
    a = explain(evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, *scenario1_providers()))
    b = explain(evaluate_claim(CLAIM_1A, store, SCENARIO1_GAZ, *scenario1_providers()))
    assert a == b
