from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from claimgraph import GraphStore
from claimgraph.cli import cli_main
from claimgraph.service import ServiceConfig, create_app

from conftest import write_jsonl
from test_pipeline import (
    CLAIM_1A,
    EVID_A,
    EVID_B,
    SCENARIO1_GAZ,
    corpus,
    scenario1_providers,
    scenario1_store,
)

CORPUS_ROWS = [
    {"url": "http://n/1", "title": "Accord vote", "body": "Denmark supports the climate accord with new funding."},
    {"url": "http://n/2", "title": "Oil ban", "body": "Norway does not support the oil ban, officials said."},
]

GAZETTEER = "Denmark\tQ35\tDenmark\nNorway\tQ20\tNorway\nclimate accord\tQ1997\tAccord\n"


@pytest.fixture
def workspace(tmp_path):
    corpus_path = write_jsonl(tmp_path / "corpus.jsonl", CORPUS_ROWS)
    gaz_path = tmp_path / "gazetteer.tsv"
    gaz_path.write_text(GAZETTEER, encoding="utf-8")
    store_path = tmp_path / "graph.ffg"
    return tmp_path, str(corpus_path), str(gaz_path), str(store_path)


def run_cli(capsys, argv):
    code = cli_main(argv)
    out = capsys.readouterr().out
    return code, out


def test_ingest_then_stats_consistency(workspace, capsys):
    _, corpus_path, _, store_path = workspace
    code, out = run_cli(capsys, ["ingest", "--input", corpus_path, "--store", store_path, "--format", "json"])
    assert code == 0
    ingest_stats = json.loads(out)
    assert ingest_stats == {"articles": 2, "sections": 4, "skipped": 0}
    code, out = run_cli(capsys, ["stats", "--store", store_path, "--format", "json"])
    assert code == 0
    stats = json.loads(out)
    assert stats["articles"] == ingest_stats["articles"]
    assert stats["sections"] == ingest_stats["sections"]


def test_annotate_idempotent(workspace, capsys):
    _, corpus_path, gaz_path, store_path = workspace
    run_cli(capsys, ["ingest", "--input", corpus_path, "--store", store_path])
    code, out = run_cli(
        capsys,
        ["annotate", "--store", store_path, "--gazetteer", gaz_path, "--format", "json"],
    )
    assert code == 0
    first = json.loads(out)
    assert first["mentions"] > 0
    code, out = run_cli(
        capsys, ["stats", "--store", store_path, "--format", "json"]
    )
    edges_once = json.loads(out)["mention_edges"]
    run_cli(capsys, ["annotate", "--store", store_path, "--gazetteer", gaz_path])
    capsys.readouterr()
    code, out = run_cli(capsys, ["stats", "--store", store_path, "--format", "json"])
    assert json.loads(out)["mention_edges"] == edges_once


def test_claim_on_empty_store_degrades(workspace, capsys):
    _, _, gaz_path, store_path = workspace
    code, out = run_cli(
        capsys,
        [
            "claim",
            "--text",
            "Denmark supports the climate accord.",
            "--store",
            store_path,
            "--gazetteer",
            gaz_path,
            "--format",
            "json",
        ],
    )
    assert code == 0
    body = json.loads(out)
    assert body["status"] == "no_evidence"
    assert body["verdict"] is None


def test_claim_end_to_end_with_reference_providers(workspace, capsys):
    _, corpus_path, gaz_path, store_path = workspace
    run_cli(capsys, ["ingest", "--input", corpus_path, "--store", store_path])
    run_cli(capsys, ["annotate", "--store", store_path, "--gazetteer", gaz_path])
    capsys.readouterr()
    code, out = run_cli(
        capsys,
        [
            "claim",
            "--text",
            "Denmark supports the climate accord.",
            "--store",
            store_path,
            "--gazetteer",
            gaz_path,
            "--format",
            "json",
        ],
    )
    assert code == 0
    body = json.loads(out)
    assert body["status"] == "ok"
    assert body["verdict"]["e"] > max(body["verdict"]["c"], body["verdict"]["n"])


def test_claim_json_deterministic(workspace, capsys):
    _, corpus_path, gaz_path, store_path = workspace
    run_cli(capsys, ["ingest", "--input", corpus_path, "--store", store_path])
    run_cli(capsys, ["annotate", "--store", store_path, "--gazetteer", gaz_path])
    capsys.readouterr()
    argv = [
        "claim", "--text", "Denmark supports the climate accord.",
        "--store", store_path, "--gazetteer", gaz_path, "--format", "json",
    ]
    _, first = run_cli(capsys, argv)
    _, second = run_cli(capsys, argv)
    assert first == second


def test_unknown_subcommand_exits_2(capsys):
    assert cli_main(["frobnicate"]) == 2


def test_missing_required_flag_exits_2(capsys):
    assert cli_main(["ingest"]) == 2


def test_domain_error_exits_1(workspace, capsys):
    _, _, _, store_path = workspace
    code = cli_main(["ingest", "--input", "/does/not/exist.jsonl", "--store", store_path])
    assert code == 1


def test_export_writes_loadable_snapshot(workspace, capsys, tmp_path):
    _, corpus_path, _, store_path = workspace
    run_cli(capsys, ["ingest", "--input", corpus_path, "--store", store_path])
    out_path = tmp_path / "exported.ffg"
    code, _ = run_cli(capsys, ["export", "--store", store_path, "--output", str(out_path)])
    assert code == 0
    assert GraphStore.load_snapshot(out_path).stats().articles == 2


def test_eval_cli_writes_report(workspace, capsys, tmp_path):
    _, corpus_path, gaz_path, store_path = workspace
    run_cli(capsys, ["ingest", "--input", corpus_path, "--store", store_path])
    run_cli(capsys, ["annotate", "--store", store_path, "--gazetteer", gaz_path])
    dataset = write_jsonl(
        tmp_path / "claims.jsonl",
        [
            {"claim": "Denmark supports the climate accord.", "gold": "SUPPORTS"},
            {"claim": "Norway does support the oil ban.", "gold": "REFUTES"},
        ],
    )
    report_path = tmp_path / "report.json"
    capsys.readouterr()
    code, out = run_cli(
        capsys,
        [
            "eval", "--dataset", str(dataset), "--report", str(report_path),
            "--store", store_path, "--gazetteer", gaz_path, "--format", "json",
        ],
    )
    assert code == 0
    assert json.loads(out)["accuracy"] == 1.0
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert len(report["claims"]) == 2
    assert report["summary"]["accuracy"] == 1.0


# -- HTTP service -------------------------------------------------------------


def scenario_app(tmp_path, **overrides):
    store_path = tmp_path / "service.ffg"
    scenario1_store().save_snapshot(store_path)
    config = ServiceConfig(store_path=str(store_path), **overrides)
    app = create_app(config)
    state = app.state.engine
    state.linker = SCENARIO1_GAZ
    state.reference_sts, state.reference_nli = scenario1_providers()
    return app


def test_healthz_before_store_load(tmp_path):
    app = create_app(ServiceConfig(), defer_load=True)
    client = TestClient(app)
    assert client.get("/healthz").status_code == 503
    app.state.engine.load()
    assert client.get("/healthz").status_code == 200


def test_claims_endpoint_replays_scenario(tmp_path):
    client = TestClient(scenario_app(tmp_path))
    resp = client.post("/claims", json={"claim": CLAIM_1A})
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["sts"] == 0.8505
    assert body["verdict"] == {"c": 0.014, "e": 0.958, "n": 0.028}
    assert body["degraded_providers"] is False


def test_claims_endpoint_rejects_bad_bodies(tmp_path):
    client = TestClient(scenario_app(tmp_path))
    assert client.post("/claims", json={"claim": ""}).status_code == 400
    assert client.post("/claims", json={"nope": 1}).status_code == 400
    assert (
        client.post("/claims", content=b"not json", headers={"content-type": "application/json"}).status_code
        == 400
    )


def test_claims_endpoint_deterministic(tmp_path):
    client = TestClient(scenario_app(tmp_path))
    a = client.post("/claims", json={"claim": CLAIM_1A}).content
    b = client.post("/claims", json={"claim": CLAIM_1A}).content
    assert a == b


def test_stats_and_ingest_endpoints(tmp_path):
    client = TestClient(scenario_app(tmp_path))
    before = client.get("/stats").json()
    lines = json.dumps({"url": "http://new", "title": "T", "body": "Fresh news today."})
    resp = client.post("/ingest", content=lines.encode("utf-8"))
    assert resp.status_code == 200
    stats = resp.json()
    assert stats["articles"] == 1
    after = client.get("/stats").json()
    assert after["articles"] == before["articles"] + 1


def test_ingest_endpoint_409_when_writer_busy(tmp_path):
    app = scenario_app(tmp_path)
    client = TestClient(app)
    store = app.state.engine.store
    release = store.try_exclusive_writer()
    assert release is not None
    try:
        resp = client.post("/ingest", content=b'{"url": "http://x", "title": "T", "body": "B."}')
        assert resp.status_code == 409
    finally:
        release()
    assert client.post("/ingest", content=b'{"url": "http://x", "title": "T", "body": "B."}').status_code == 200


def test_remote_provider_degrades_to_reference(tmp_path):
    app = scenario_app(
        tmp_path, sts_provider="remote", sts_endpoint="http://127.0.0.1:9"
    )
    client = TestClient(app)
    resp = client.post("/claims", json={"claim": CLAIM_1A})
    assert resp.status_code == 200
    body = resp.json()
    assert body["degraded_providers"] is True
    assert body["status"] == "ok"
    assert body["sts"] == 0.8505


def test_remote_provider_strict_503(tmp_path):
    app = scenario_app(
        tmp_path,
        sts_provider="remote",
        sts_endpoint="http://127.0.0.1:9",
        strict_providers=True,
    )
    client = TestClient(app)
    assert client.post("/claims", json={"claim": CLAIM_1A}).status_code == 503


def test_healthz_reports_dead_remote_provider(tmp_path):
    app = scenario_app(tmp_path, sts_provider="remote", sts_endpoint="http://127.0.0.1:9")
    client = TestClient(app)
    assert client.get("/healthz").status_code == 503
