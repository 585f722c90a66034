import numpy as np
import pytest
from fastapi.testclient import TestClient

from qcomp import experiments, handlers, maps, norms, randomgen, schemas
from qcomp.errors import SolverError
from qcomp.service import app, create_app

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = np.ones((2, 2), dtype=complex) / 2


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def map_body(phi):
    return schemas.MapRecord.from_map(phi).model_dump()


def exp_body(T):
    return schemas.ExperimentRecord.from_experiment(T).model_dump()


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_create_app_is_fresh():
    other = create_app()
    assert other is not app
    with TestClient(other) as c:
        assert c.get("/health").status_code == 200


def test_diamond_route(client):
    r = client.post("/diamond", json={"map": map_body(maps.identity_map(2))})
    assert r.status_code == 200
    body = r.json()
    assert body["command"] == "diamond"
    assert body["value"] == pytest.approx(1.0, abs=1e-6)
    assert body["certificates"], "expected at least one certificate"
    for cert in body["certificates"]:
        assert cert["status"] == "optimal"
        assert cert["rel_gap"] <= 1e-7
        assert max(cert["primal_infeas"], cert["dual_infeas"]) <= 1e-7
    assert body["residuals"]["solves"] >= 1


def test_dual_route(client):
    r = client.post("/dual", json={"map": map_body(maps.identity_map(2))})
    assert r.status_code == 200
    assert r.json()["value"] == pytest.approx(4.0, abs=1e-6)


def test_psucc_route(client):
    g = randomgen.rng(0)
    E_rec = {
        "dim": 2,
        "items": [
            {"weight": 0.5, "state": schemas.matrix_to_wire(P0)},
            {"weight": 0.5, "state": schemas.matrix_to_wire(PLUS)},
        ],
    }
    r = client.post("/psucc", json={"ensemble": E_rec})
    assert r.status_code == 200
    body = r.json()
    assert body["value"] == pytest.approx((2 + np.sqrt(2)) / 4, abs=1e-6)
    povm = schemas.PovmRecord.model_validate(body["povm"]).to_povm()
    assert povm.n == 2 and povm.dim == 2


def test_ensemble_from_map_route(client):
    r = client.post("/ensemble-from-map", json={"map": map_body(maps.identity_map(2))})
    assert r.status_code == 200
    body = r.json()
    rec = schemas.EnsembleRecord.model_validate(body["ensemble"])
    assert len(rec.items) == 4
    assert all(it.weight == pytest.approx(0.25) for it in rec.items)


def test_deficiency_and_lecam_routes(client):
    ident = map_body(maps.identity_map(2))
    depol = map_body(norms.erasure_map(np.eye(2, dtype=complex) / 2, 2))
    r = client.post("/deficiency", json={"phi": ident, "psi": depol})
    assert r.status_code == 200
    body = r.json()
    assert body["value"] == pytest.approx(1.5, abs=1e-5)
    assert schemas.MapRecord.model_validate(body["postprocessing"]).to_map().d_out == 2
    assert body["witness"] is not None
    assert body["values"]["certified_gap"] < 1e-6

    r = client.post("/lecam", json={"phi": ident, "psi": depol})
    assert r.status_code == 200
    assert r.json()["value"] == pytest.approx(1.5, abs=1e-5)


def test_exp_deficiency_route(client):
    S = experiments.Experiment(("0", "1"), (P0, P1))
    T = experiments.Experiment(("0", "1"), (P0, PLUS))
    r = client.post("/exp-deficiency", json={"s": exp_body(S), "t": exp_body(T)})
    assert r.status_code == 200
    body = r.json()
    assert body["value"] == pytest.approx((2 - np.sqrt(2)) / 4, abs=1e-6)
    alpha = schemas.MapRecord.model_validate(body["randomization"]).to_map()
    assert maps.is_channel(alpha)


def test_lecam_classical_route(client):
    S = experiments.Experiment(("a", "b"), (P0, P1))
    T = experiments.Experiment(
        ("a", "b"),
        (np.diag([0.8, 0.2]).astype(complex), np.diag([0.2, 0.8]).astype(complex)),
    )
    r = client.post("/lecam-classical", json={"s": exp_body(S), "t": exp_body(T)})
    assert r.status_code == 200
    assert r.json()["value"] == pytest.approx(0.2, abs=1e-8)

    bad = client.post(
        "/lecam-classical",
        json={
            "s": exp_body(experiments.Experiment(("a", "b"), (P0, PLUS))),
            "t": exp_body(T),
        },
    )
    assert bad.status_code == 422
    assert bad.json()["kind"] == "ValidationError"


def test_verify_route(client):
    r = client.post("/verify", json={"suite": "norms", "trials": 2})
    assert r.status_code == 200
    body = r.json()
    assert body["value"] == 0.0
    assert body["values"]["pass"] is True
    assert body["values"]["parts"]
    assert body["residuals"]["statuses"] == ["optimal"]


def test_verify_route_unknown_suite(client):
    r = client.post("/verify", json={"suite": "nonsense"})
    assert r.status_code == 422
    assert r.json()["kind"] == "ValidationError"


def test_gen_route_is_deterministic(client):
    body = {"kind": "ensemble", "seed": 9, "d_in": 2, "n": 3}
    a = client.post("/gen", json=body)
    b = client.post("/gen", json=body)
    assert a.status_code == 200
    assert a.json() == b.json()
    rec = schemas.EnsembleRecord.model_validate(a.json())
    assert len(rec.items) == 3

    unknown = client.post("/gen", json={"kind": "wormhole"})
    assert unknown.status_code == 422


def test_request_validation_errors(client):
    missing = client.post("/diamond", json={})
    assert missing.status_code == 422
    extra = client.post(
        "/diamond", json={"map": map_body(maps.identity_map(2)), "zzz": 1}
    )
    assert extra.status_code == 422
    domain = client.post(
        "/psucc",
        json={
            "ensemble": {
                "dim": 2,
                "items": [
                    {"weight": 0.6, "state": schemas.matrix_to_wire(P0)},
                    {"weight": 0.6, "state": schemas.matrix_to_wire(P1)},
                ],
            }
        },
    )
    assert domain.status_code == 422
    assert domain.json()["kind"] == "ValidationError"


def test_solver_failure_maps_to_500(client, monkeypatch):
    def boom(*args, **kwargs):
        raise SolverError("synthetic failure")

    monkeypatch.setattr(handlers.norms, "diamond_norm", boom)
    r = client.post("/diamond", json={"map": map_body(maps.identity_map(2))})
    assert r.status_code == 500
    body = r.json()
    assert body["kind"] == "SolverError"
    assert "synthetic failure" in body["error"]
