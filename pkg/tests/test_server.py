"""HTTP API behaviour over the toy fixture."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from taskmill.server import create_app

from conftest import DATA_DIR


@pytest.fixture()
def client() -> TestClient:
    return TestClient(create_app())


@pytest.fixture()
def session_id(client: TestClient) -> str:
    sidecar = json.loads((DATA_DIR / "toy_flights.schema.json").read_text())
    response = client.post(
        "/sessions",
        json={
            "schema_sidecar": sidecar,
            "csv_path": str(DATA_DIR / "toy_flights.csv"),
            "config": {"m": 8, "k": 4, "seed": 0},
        },
    )
    assert response.status_code == 200
    return response.json()["session_id"]


def run_session(client: TestClient, session_id: str) -> list[dict]:
    response = client.post(f"/sessions/{session_id}/run")
    assert response.status_code == 200
    return response.json()["recommendations"]


class TestSessions:
    def test_unknown_session_404(self, client):
        response = client.get("/sessions/nope/recommendations")
        assert response.status_code == 404
        assert response.json()["detail"] == "NoSession"

    def test_bad_csv_path_400(self, client):
        sidecar = json.loads((DATA_DIR / "toy_flights.schema.json").read_text())
        response = client.post(
            "/sessions", json={"schema_sidecar": sidecar, "csv_path": "/does/not/exist.csv"}
        )
        assert response.status_code == 400

    def test_recommendations_empty_before_run(self, client, session_id):
        response = client.get(f"/sessions/{session_id}/recommendations")
        assert response.status_code == 200
        assert response.json()["recommendations"] == []


class TestRunAndRank:
    def test_run_returns_k_recommendations(self, client, session_id):
        recs = run_session(client, session_id)
        assert len(recs) == 4
        assert [r["rank"] for r in recs] == [1, 2, 3, 4]

    def test_rank_override_via_query(self, client, session_id):
        run_session(client, session_id)
        response = client.get(f"/sessions/{session_id}/recommendations", params={"k": 2})
        assert len(response.json()["recommendations"]) == 2

    def test_out_of_range_query_params_400(self, client, session_id):
        run_session(client, session_id)
        assert client.get(f"/sessions/{session_id}/recommendations",
                          params={"k": 0}).status_code == 400
        assert client.get(f"/sessions/{session_id}/recommendations",
                          params={"lambda": 1.5}).status_code == 400

    def test_lambda_one_matches_run_order(self, client, session_id):
        first = run_session(client, session_id)
        response = client.get(
            f"/sessions/{session_id}/recommendations", params={"lambda": 1.0, "k": 4}
        )
        assert [r["task_id"] for r in response.json()["recommendations"]] == [
            r["task_id"] for r in first
        ]

    def test_task_detail_nl_matches_listing(self, client, session_id):
        recs = run_session(client, session_id)
        top = recs[0]
        response = client.get(f"/sessions/{session_id}/tasks/{top['task_id']}")
        assert response.status_code == 200
        doc = response.json()
        assert doc["nl"] == top["nl"]
        assert doc["petel"] == top["petel"]

    def test_unknown_task_404(self, client, session_id):
        run_session(client, session_id)
        response = client.get(f"/sessions/{session_id}/tasks/ffffffffffffffff")
        assert response.status_code == 404


class TestFeedback:
    def test_feedback_reranks_in_one_round_trip(self, client, session_id):
        recs = run_session(client, session_id)
        top = recs[0]
        response = client.post(
            f"/sessions/{session_id}/feedback",
            json={"task_id": top["task_id"], "verdict": "not_useful"},
        )
        assert response.status_code == 200
        new_recs = response.json()["recommendations"]
        updated = next((r for r in new_recs if r["task_id"] == top["task_id"]), None)
        if updated is not None:
            assert updated["utility"] < top["utility"]

    def test_bad_verdict_400(self, client, session_id):
        run_session(client, session_id)
        response = client.post(
            f"/sessions/{session_id}/feedback", json={"task_id": "x", "verdict": "meh"}
        )
        assert response.status_code == 400

    def test_busy_session_409(self, client, session_id):
        run_session(client, session_id)
        app = client.app
        registry = app.state.registry
        lock = registry.locks[session_id]
        assert lock.acquire(blocking=False)
        try:
            response = client.post(
                f"/sessions/{session_id}/feedback",
                json={"task_id": "x", "verdict": "useful"},
            )
            assert response.status_code == 409
        finally:
            lock.release()


class TestParamsAndModel:
    def test_params_update_marks_stale(self, client, session_id):
        run_session(client, session_id)
        response = client.post(f"/sessions/{session_id}/params", json={"lead": "1d"})
        assert response.status_code == 200 and response.json()["stale"] is True
        listing = client.get(f"/sessions/{session_id}/recommendations")
        assert listing.json()["stale"] is True
        run_session(client, session_id)
        listing = client.get(f"/sessions/{session_id}/recommendations")
        assert listing.json()["stale"] is False

    def test_bad_duration_400(self, client, session_id):
        response = client.post(f"/sessions/{session_id}/params", json={"window": "2weeks"})
        assert response.status_code == 400

    def test_model_export_import_round_trip(self, client, session_id):
        recs = run_session(client, session_id)
        client.post(
            f"/sessions/{session_id}/feedback",
            json={"task_id": recs[0]["task_id"], "verdict": "useful"},
        )
        blob = client.get(f"/sessions/{session_id}/model/export").json()["blob"]
        response = client.post(f"/sessions/{session_id}/model/import", json={"blob": blob})
        assert response.status_code == 200

    def test_import_rejects_corrupt_blob(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/model/import", json={"blob": "{nope"}
        )
        assert response.status_code == 400
