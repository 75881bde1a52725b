import json

import pytest
from fastapi.testclient import TestClient

from linkeval import error_table, ratio_estimate
from linkeval.estimators import build_target, estimates_to_json
from linkeval.labeling import BenchmarkSet
from linkeval.service import ServiceState, create_app


@pytest.fixture
def state(tmp_path, canonical_prediction, canonical_attrs):
    return ServiceState(canonical_prediction, canonical_attrs, journal_dir=tmp_path / "journals")


@pytest.fixture
def client(state):
    return TestClient(create_app(state))


def make_session(client, k=2, seed=33):
    resp = client.post("/api/sessions", json={"design": "pps_record", "k": k, "seed": seed})
    assert resp.status_code == 200
    return resp.json()["session_id"]


def drive_canonical(client):
    """Create a 2-task session over the canonical prediction and label it."""
    sid = make_session(client, k=2, seed=33)
    resolved = []
    for _ in range(2):
        task = client.get(f"/api/sessions/{sid}/tasks/next", params={"labeler": "ann"}).json()
        handle = task["id"]
        if "r3" in task["predicted_cluster"]:  # the {r3,r4,r5} cluster
            if task["seed_record"] == "r3":
                for rid in ("r4", "r5"):
                    client.post(f"/api/tasks/{handle}/edits", json={"op": "remove", "record": rid, "labeler": "ann"})
                for rid in ("r1", "r2"):
                    client.post(f"/api/tasks/{handle}/edits", json={"op": "add", "record": rid, "labeler": "ann"})
            else:  # seeded at r4/r5: resolve to {r4,r5}
                client.post(f"/api/tasks/{handle}/edits", json={"op": "remove", "record": "r3", "labeler": "ann"})
        else:  # the {r1,r2} cluster: resolve to {r1,r2,r3}
            client.post(f"/api/tasks/{handle}/edits", json={"op": "add", "record": "r3", "labeler": "ann"})
        out = client.post(f"/api/tasks/{handle}/finalize", json={"labeler": "ann"})
        assert out.status_code == 200
        resolved.append(out.json()["resolved"])
    return sid, resolved


def test_session_listing_and_pagination(client):
    for seed in (1, 2, 3):
        make_session(client, seed=seed)
    page = client.get("/api/sessions", params={"limit": 2, "offset": 0}).json()
    assert page["v"] == 1
    assert page["total"] == 3
    assert len(page["sessions"]) == 2
    rest = client.get("/api/sessions", params={"limit": 2, "offset": 2}).json()
    assert len(rest["sessions"]) == 1


def test_unknown_ids_404(client):
    assert client.get("/api/sessions/nope").status_code == 404
    assert client.post("/api/tasks/nope:t0001/edits", json={"op": "add", "record": "r1"}).status_code == 404
    sid = make_session(client)
    assert client.post(f"/api/tasks/{sid}:t9999/edits", json={"op": "add", "record": "r1"}).status_code == 404


def test_edit_rules_mapped_to_http_codes(client):
    sid = make_session(client, k=1, seed=5)
    task = client.get(f"/api/sessions/{sid}/tasks/next", params={"labeler": "ann"}).json()
    handle = task["id"]
    seed_record = task["seed_record"]
    # removing the seed -> 422 with the QC message
    resp = client.post(f"/api/tasks/{handle}/edits", json={"op": "remove", "record": seed_record, "labeler": "ann"})
    assert resp.status_code == 422
    assert "seed record is immovable" in resp.json()["detail"]
    # another labeler inside the lease window -> 409
    resp = client.post(f"/api/tasks/{handle}/edits", json={"op": "add", "record": "zz", "labeler": "bo"})
    assert resp.status_code == 409


def test_next_task_exhausted_404(client):
    sid = make_session(client, k=1, seed=5)
    assert client.get(f"/api/sessions/{sid}/tasks/next", params={"labeler": "ann"}).status_code == 200
    assert client.get(f"/api/sessions/{sid}/tasks/next", params={"labeler": "ann"}).status_code == 404


def test_search_endpoint(client):
    hits = client.get("/api/search", params={"q": "De Jonghe"}).json()
    assert hits["v"] == 1
    ids = [row["record_id"] for row in hits["results"]]
    assert ids[:2] == ["r1", "r2"]
    assert client.get("/api/search", params={"q": "  "}).status_code == 422


def test_membership_matrix_union(client):
    sid, _ = drive_canonical(client)
    tasks = client.get(f"/api/sessions/{sid}/tasks").json()["tasks"]
    task = next(t for t in tasks if set(t["resolved"]) == {"r1", "r2", "r3"})
    matrix = client.get(f"/api/clusters/{task['id']}/membership-matrix").json()
    assert matrix["total"] == 5  # union of {r1,r2} and {r3,r4,r5}
    rows = {r["record_id"]: r for r in matrix["rows"]}
    assert set(rows) == {"r1", "r2", "r3", "r4", "r5"}
    assert rows["r3"]["true_cluster"] == task["id"]
    assert rows["r4"]["true_cluster"] == ""  # outside the focal true cluster
    assert rows["r1"]["predicted_cluster"] != rows["r4"]["predicted_cluster"]
    assert rows["r1"]["attributes"]["label"] == "Lutgard De Jonghe"


def test_estimates_match_cli_serialization(client, state, canonical_prediction):
    sid, _ = drive_canonical(client)
    resp = client.get("/api/estimates", params={"session": sid, "metrics": "pairwise_precision,bcubed_recall"})
    assert resp.status_code == 200

    # recompute through the library exactly as the CLI does
    session = state.sessions[sid]
    from linkeval.labeling import export_benchmark

    benchmark = export_benchmark(session)
    table = error_table(benchmark.to_cluster_sample(), canonical_prediction)
    expected = []
    for name in ("pairwise_precision", "bcubed_recall"):
        target = build_target(name, n_records=5, n_pred_clusters=2)
        expected.append(ratio_estimate(table.rows, target, design=benchmark.design))
    assert resp.content.decode() == estimates_to_json(expected)


def test_estimates_unfinished_session_rejected(client):
    sid = make_session(client, k=1, seed=5)
    resp = client.get("/api/estimates", params={"session": sid})
    assert resp.status_code == 422
    assert "unfinalized" in resp.json()["detail"]


def test_tags_and_audit_report(client):
    sid, _ = drive_canonical(client)
    tasks = client.get(f"/api/sessions/{sid}/tasks").json()["tasks"]
    merged = next(t for t in tasks if set(t["resolved"]) == {"r4", "r5"})
    ok = client.post(
        f"/api/clusters/{merged['id']}/tags",
        json={"direction": "overclustering", "label": "same name", "note": ""},
    )
    assert ok.status_code == 200
    bad = client.post(
        f"/api/clusters/{merged['id']}/tags",
        json={"direction": "underclustering", "label": "typo in name", "note": ""},
    )
    assert bad.status_code == 422
    report = client.get("/api/audit-report").json()
    assert report["frequencies"][0]["label"] == "same name"
    assert report["frequencies"][0]["frequency"] == 1.0


def test_summary_stats_endpoint(client):
    report = client.get("/api/summary-stats").json()
    assert report["v"] == 1
    assert report["avg_cluster_size"] == 2.5
    assert report["homonymy_rate"] is not None


def test_qc_endpoint(client):
    sid, _ = drive_canonical(client)
    flags = client.get(f"/api/sessions/{sid}/qc").json()
    assert flags["v"] == 1
    assert isinstance(flags["flags"], list)


def test_journal_survives_restart(tmp_path, canonical_prediction, canonical_attrs):
    jdir = tmp_path / "journals"
    state1 = ServiceState(canonical_prediction, canonical_attrs, journal_dir=jdir)
    client1 = TestClient(create_app(state1))
    sid, resolved = drive_canonical(client1)

    # a fresh service over the same journal dir reconstructs the state
    state2 = ServiceState(canonical_prediction, canonical_attrs, journal_dir=jdir)
    client2 = TestClient(create_app(state2))
    listing = client2.get("/api/sessions").json()
    assert listing["total"] == 1
    tasks = client2.get(f"/api/sessions/{sid}/tasks").json()["tasks"]
    assert sorted(tuple(t["resolved"]) for t in tasks) == sorted(tuple(r) for r in resolved)
    assert json.dumps(state2.sessions[sid].to_state(), sort_keys=True) == json.dumps(
        state1.sessions[sid].to_state(), sort_keys=True
    )


def test_bearer_token_auth(tmp_path, canonical_prediction, canonical_attrs, monkeypatch):
    monkeypatch.setenv("LINKEVAL_TOKEN", "hunter2")
    state = ServiceState(canonical_prediction, canonical_attrs, journal_dir=tmp_path / "j")
    client = TestClient(create_app(state))
    assert client.get("/api/sessions").status_code == 401
    assert client.get("/api/sessions", headers={"Authorization": "Bearer wrong"}).status_code == 401
    assert client.get("/api/sessions", headers={"Authorization": "Bearer hunter2"}).status_code == 200


def test_benchmark_export_via_session_matches_file(client, state, tmp_path):
    sid, _ = drive_canonical(client)
    from linkeval.labeling import export_benchmark

    benchmark = export_benchmark(state.sessions[sid])
    path = tmp_path / "bench.jsonl"
    benchmark.to_jsonl(path)
    loaded = BenchmarkSet.from_jsonl(path)
    assert {d.members for d in loaded.draws} == {d.members for d in benchmark.draws}


def test_benchmark_endpoint(client):
    sid, _ = drive_canonical(client)
    payload = client.get(f"/api/sessions/{sid}/benchmark").json()
    assert payload["v"] == 1
    members = sorted(tuple(d["members"]) for d in payload["draws"])
    assert members == [("r1", "r2", "r3"), ("r4", "r5")]
    # pps weights resolved from the true cluster sizes
    weights = {tuple(d["members"]): d["p_c"] for d in payload["draws"]}
    assert abs(weights[("r1", "r2", "r3")] - 3 / 5) < 1e-12
    assert abs(weights[("r4", "r5")] - 2 / 5) < 1e-12

    unfinished = make_session(client, k=1, seed=8)
    assert client.get(f"/api/sessions/{unfinished}/benchmark").status_code == 422


def test_api_and_cli_estimates_byte_identical(client, state, tmp_path, canonical_prediction, capsys):
    sid, _ = drive_canonical(client)
    api_bytes = client.get("/api/estimates", params={"session": sid}).content

    from linkeval.cli import dispatch
    from linkeval.labeling import export_benchmark

    bench_path = tmp_path / "bench.jsonl"
    export_benchmark(state.sessions[sid]).to_jsonl(bench_path)
    pred_path = tmp_path / "pred.csv"
    canonical_prediction.to_csv(pred_path)
    out_path = tmp_path / "estimates.json"
    code = dispatch([
        "estimate", "--truth-sample", str(bench_path), "--prediction", str(pred_path),
        "--json-out", str(out_path),
    ])
    assert code == 0
    assert out_path.read_bytes() == api_bytes


def test_spec_named_paths_alias_the_api(client):
    # the endpoints exist both under /api and at the documented root paths
    sid = make_session(client, k=1, seed=4)
    a = client.get("/sessions").json()
    b = client.get("/api/sessions").json()
    assert a == b
    assert client.get("/summary-stats").json() == client.get("/api/summary-stats").json()
    assert client.get(f"/sessions/{sid}/tasks").status_code == 200
