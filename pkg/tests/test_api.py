import pytest
from fastapi.testclient import TestClient

from src.api import app
from src.simulate import chain3_preset, sample_scm


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def payload():
    d = sample_scm(chain3_preset(), 300, seed=2)
    return {
        "columns": list(d.columns),
        "rows": d.values.tolist(),
        "smoother": {"tuning": 0.5},
    }


def test_health_check(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_root_endpoint(client):
    response = client.get("/")
    assert response.status_code == 200
    data = response.json()
    assert "message" in data
    assert "POST /fit" in data["endpoints"]


def test_fit_returns_tree(client, payload):
    response = client.post("/fit", json=payload)
    assert response.status_code == 200
    data = response.json()
    assert len(data["tree"]["edges"]) == 2
    assert data["weights"]["kind"] == "gaussian"


def test_fit_entropy_score(client, payload):
    response = client.post("/fit", json={**payload, "score": "entropy"})
    assert response.status_code == 200
    assert response.json()["weights"]["kind"] == "entropy"


def test_confidence_intervals(client, payload):
    response = client.post("/confidence", json={**payload, "alpha": 0.1})
    assert response.status_code == 200
    data = response.json()
    assert data["alpha"] == 0.1
    assert len(data["edges"]) == 6


def test_substructure_empty_hypothesis(client, payload):
    response = client.post("/test", json=payload)
    assert response.status_code == 200
    assert response.json()["reject"] is False


def test_substructure_infeasible(client, payload):
    """Dois pais para Y: hipótese inviável é rejeitada sem erro."""
    response = client.post("/test", json={**payload, "constraints": ["X->Y", "Z->Y"]})
    assert response.status_code == 200
    data = response.json()
    assert data["reject"] is True
    assert data["infeasible"] is True


def test_malformed_constraint_is_bad_request(client, payload):
    response = client.post("/test", json={**payload, "constraints": ["X=>Y"]})
    assert response.status_code == 400
    assert "malformada" in response.json()["detail"]


def test_constant_column_is_bad_request(client):
    rows = [[float(k), 1.0] for k in range(50)]
    response = client.post("/fit", json={"columns": ["A", "B"], "rows": rows, "smoother": {"tuning": 0.5}})
    assert response.status_code == 400


def test_ragged_rows_are_rejected(client):
    response = client.post("/fit", json={"columns": ["A", "B"], "rows": [[1.0, 2.0], [3.0]]})
    assert response.status_code in (400, 422)
