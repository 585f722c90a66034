import json

import numpy as np
import pytest

from qcomp import cli, experiments, handlers, maps, norms, schemas
from qcomp.errors import SolverError

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = np.ones((2, 2), dtype=complex) / 2


def write_map(tmp_path, name, phi):
    path = tmp_path / name
    path.write_text(schemas.MapRecord.from_map(phi).model_dump_json())
    return str(path)


def write_experiment(tmp_path, name, T):
    path = tmp_path / name
    path.write_text(schemas.ExperimentRecord.from_experiment(T).model_dump_json())
    return str(path)


def run_ok(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr()
    assert code == 0, out.err
    return out.out


def run_fail(capsys, argv, expected_code):
    code = cli.run(argv)
    out = capsys.readouterr()
    assert code == expected_code, out.err
    err = json.loads(out.err)
    assert set(err) == {"error", "kind"}
    return err


def test_gen_is_byte_stable(capsys):
    first = run_ok(capsys, ["gen", "channel", "--seed", "7"])
    second = run_ok(capsys, ["gen", "channel", "--seed", "7"])
    assert first == second
    third = run_ok(capsys, ["gen", "channel", "--seed", "8"])
    assert third != first
    rec = schemas.MapRecord.model_validate(json.loads(first))
    assert maps.is_channel(rec.to_map())


def test_gen_all_kinds(capsys):
    models = {
        "channel": schemas.MapRecord,
        "cp-map": schemas.MapRecord,
        "hermitian-map": schemas.MapRecord,
        "ensemble": schemas.EnsembleRecord,
        "experiment": schemas.ExperimentRecord,
        "povm": schemas.PovmRecord,
    }
    for kind, model in models.items():
        out = run_ok(capsys, ["gen", kind, "--seed", "1", "--n", "3"])
        model.model_validate(json.loads(out))


def test_gen_output_file(tmp_path, capsys):
    target = tmp_path / "map.json"
    out = run_ok(capsys, ["gen", "channel", "--seed", "2", "--output", str(target)])
    assert out == ""
    schemas.MapRecord.model_validate(json.loads(target.read_text()))


def test_diamond_and_dual_on_identity(tmp_path, capsys):
    path = write_map(tmp_path, "id.json", maps.identity_map(2))
    report = json.loads(run_ok(capsys, ["diamond", "--map", path]))
    assert report["command"] == "diamond"
    assert report["value"] == pytest.approx(1.0, abs=1e-6)
    assert report["certificates"]
    report = json.loads(run_ok(capsys, ["dual", "--map", path]))
    assert report["value"] == pytest.approx(4.0, abs=1e-6)


def test_psucc_pipeline_from_gen(tmp_path, capsys):
    ens = tmp_path / "ens.json"
    run_ok(capsys, ["gen", "ensemble", "--seed", "3", "--n", "3", "--output", str(ens)])
    report = json.loads(run_ok(capsys, ["psucc", "--ensemble", str(ens)]))
    assert 1.0 / 3.0 - 1e-6 <= report["value"] <= 1.0 + 1e-9
    assert report["povm"] is not None


def test_ensemble_from_map_command(tmp_path, capsys):
    path = write_map(tmp_path, "id.json", maps.identity_map(2))
    report = json.loads(run_ok(capsys, ["ensemble-from-map", "--map", path]))
    rec = schemas.EnsembleRecord.model_validate(report["ensemble"])
    assert len(rec.items) == 4


def test_deficiency_and_lecam_commands(tmp_path, capsys):
    ident = write_map(tmp_path, "id.json", maps.identity_map(2))
    depol = write_map(
        tmp_path, "depol.json", norms.erasure_map(np.eye(2, dtype=complex) / 2, 2)
    )
    report = json.loads(run_ok(capsys, ["deficiency", "--phi", ident, "--psi", depol]))
    assert report["value"] == pytest.approx(1.5, abs=1e-5)
    assert report["postprocessing"] is not None
    report = json.loads(run_ok(capsys, ["lecam", "--phi", ident, "--psi", depol]))
    assert report["value"] == pytest.approx(1.5, abs=1e-5)


def test_exp_deficiency_command(tmp_path, capsys):
    s = write_experiment(tmp_path, "s.json", experiments.Experiment(("0", "1"), (P0, P1)))
    t = write_experiment(tmp_path, "t.json", experiments.Experiment(("0", "1"), (P0, PLUS)))
    report = json.loads(run_ok(capsys, ["exp-deficiency", "--s", s, "--t", t]))
    assert report["value"] == pytest.approx((2 - np.sqrt(2)) / 4, abs=1e-6)
    assert report["randomization"] is not None


def test_generated_experiment_has_zero_self_deficiency(tmp_path, capsys):
    path = tmp_path / "exp.json"
    run_ok(capsys, ["gen", "experiment", "--seed", "4", "--n", "2", "--output", str(path)])
    report = json.loads(run_ok(capsys, ["exp-deficiency", "--s", str(path), "--t", str(path)]))
    assert report["value"] == pytest.approx(0.0, abs=1e-6)


def test_lecam_classical_command(tmp_path, capsys):
    s = write_experiment(tmp_path, "s.json", experiments.Experiment(("a", "b"), (P0, P1)))
    t = write_experiment(
        tmp_path,
        "t.json",
        experiments.Experiment(
            ("a", "b"),
            (np.diag([0.8, 0.2]).astype(complex), np.diag([0.2, 0.8]).astype(complex)),
        ),
    )
    report = json.loads(run_ok(capsys, ["lecam-classical", "--s", s, "--t", t]))
    assert report["value"] == pytest.approx(0.2, abs=1e-8)


def test_verify_command_and_jsonl(capsys):
    out = run_ok(capsys, ["verify", "--suite", "norms", "--trials", "1"])
    report = json.loads(out)
    assert report["values"]["pass"] is True
    assert report["value"] == 0.0

    out = run_ok(capsys, ["exp-verify", "--suite", "norms", "--trials", "1", "--jsonl"])
    lines = out.strip().splitlines()
    assert len(lines) >= 2
    summary = json.loads(lines[-1])
    assert summary["values"]["pass"] is True
    for line in lines[:-1]:
        part = json.loads(line)
        assert "part" in part and "violations" in part


def test_pinned_example_values(tmp_path, capsys):
    ident = write_map(tmp_path, "id2.json", maps.identity_map(2))
    report = json.loads(run_ok(capsys, ["deficiency", "--phi", ident, "--psi", ident]))
    assert report["value"] == pytest.approx(0.0, abs=1e-6)

    Z = np.diag([1.0, -1.0]).astype(complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    cq_zx = write_map(tmp_path, "cq_paulis.json", maps.cq_map([Z, X]))
    report = json.loads(run_ok(capsys, ["diamond", "--map", cq_zx]))
    assert report["value"] == pytest.approx(2.0, abs=1e-6)

    half_depol = 0.5 * maps.identity_map(2) + 0.5 * norms.erasure_map(
        np.eye(2, dtype=complex) / 2, 2
    )
    dep = write_map(tmp_path, "dep05.json", half_depol)
    report = json.loads(
        run_ok(
            capsys,
            ["verify", "--suite", "thm1", "--phi", ident, "--psi", dep,
             "--trials", "3", "--seed", "7"],
        )
    )
    assert report["value"] == 0.0
    assert report["values"]["pass"] is True


def test_output_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    path = write_map(tmp_path, "id.json", maps.identity_map(2))
    out = run_ok(capsys, ["diamond", "--map", path, "--output", str(target)])
    assert out == ""
    report = json.loads(target.read_text())
    assert report["value"] == pytest.approx(1.0, abs=1e-6)


def test_validation_failures_exit_2(tmp_path, capsys):
    err = run_fail(capsys, [], 2)
    assert err["kind"] == "ValidationError"
    run_fail(capsys, ["diamond", "--map", str(tmp_path / "missing.json")], 2)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    run_fail(capsys, ["diamond", "--map", str(bad)], 2)
    wrong_shape = tmp_path / "shape.json"
    wrong_shape.write_text(json.dumps({"d_in": 2, "d_out": 2, "choi": [[1.0]]}))
    run_fail(capsys, ["diamond", "--map", str(wrong_shape)], 2)
    run_fail(capsys, ["verify", "--suite", "nonsense"], 2)
    run_fail(capsys, ["diamond", "--nonsense"], 2)
    path = write_map(tmp_path, "id.json", maps.identity_map(2))
    run_fail(capsys, ["diamond", "--map", path, "--tol", "-1"], 2)


def test_solver_failure_exits_3(tmp_path, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise SolverError("synthetic failure")

    monkeypatch.setattr(handlers.norms, "diamond_norm", boom)
    path = write_map(tmp_path, "id.json", maps.identity_map(2))
    err = run_fail(capsys, ["diamond", "--map", path], 3)
    assert err["kind"] == "SolverError"


def test_remote_mode_against_test_server(tmp_path, capsys, monkeypatch):
    import httpx
    from fastapi.testclient import TestClient

    from qcomp.service import app

    client = TestClient(app)

    def fake_post(url, json=None, timeout=None):
        return client.post(url, json=json)

    monkeypatch.setattr(httpx, "post", fake_post)
    path = write_map(tmp_path, "id.json", maps.identity_map(2))
    report = json.loads(
        run_ok(capsys, ["diamond", "--map", path, "--url", "http://testserver"])
    )
    assert report["value"] == pytest.approx(1.0, abs=1e-6)

    s = write_experiment(tmp_path, "s.json", experiments.Experiment(("a", "b"), (P0, PLUS)))
    t = write_experiment(tmp_path, "t.json", experiments.Experiment(("a", "b"), (P0, P1)))
    err = run_fail(
        capsys,
        ["lecam-classical", "--s", s, "--t", t, "--url", "http://testserver"],
        2,
    )
    assert err["kind"] == "ValidationError"


def test_main_raises_system_exit(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        import sys

        old = sys.argv
        sys.argv = ["qcomp"]
        try:
            cli.main()
        finally:
            sys.argv = old
    assert exc.value.code == 2
    capsys.readouterr()
