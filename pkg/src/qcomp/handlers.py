"""Command handlers shared by the command line tool and the HTTP service.

Each handler accepts a validated request model, runs the computation
inside a certification log, and returns a ``Report`` carrying the
value(s), one certificate per semidefinite program solved, a summary
of worst-case recomputed residuals, and the wall time. The command
line calls these functions in process; the service exposes them as
POST routes with identical bodies.
"""

from __future__ import annotations

import time
from typing import Any

import numpy as np

from . import deficiency, discrimination, experiments, norms, randomgen, sdp, verify
from .schemas import (
    Certificate,
    DeficiencyResponse,
    DiamondRequest,
    DualRequest,
    EnsembleFromMapRequest,
    EnsembleFromMapResponse,
    EnsembleRecord,
    ExpDeficiencyRequest,
    ExpDeficiencyResponse,
    ExperimentRecord,
    GenRequest,
    MapRecord,
    PairRequest,
    PovmRecord,
    PsuccRequest,
    PsuccResponse,
    Report,
    VerifyRequest,
)
from .errors import ValidationError


def _certs(records: list[dict[str, Any]]) -> list[Certificate]:
    return [Certificate(**r) for r in records]


def diamond(req: DiamondRequest) -> Report:
    t0 = time.perf_counter()
    phi = req.map.to_map()
    with sdp.certification_log() as records:
        value = norms.diamond_norm(phi, gap_tol=req.tol)
    return Report(
        command="diamond",
        inputs={"d_in": phi.d_in, "d_out": phi.d_out, "tol": req.tol},
        value=value,
        certificates=_certs(records),
        residuals=sdp.summarize_certificates(records),
        wall_time=time.perf_counter() - t0,
    )


def dual(req: DualRequest) -> Report:
    t0 = time.perf_counter()
    psi = req.map.to_map()
    with sdp.certification_log() as records:
        value = norms.dual_diamond_norm(psi, gap_tol=req.tol)
    return Report(
        command="dual",
        inputs={"d_in": psi.d_in, "d_out": psi.d_out, "tol": req.tol},
        value=value,
        certificates=_certs(records),
        residuals=sdp.summarize_certificates(records),
        wall_time=time.perf_counter() - t0,
    )


def psucc(req: PsuccRequest) -> PsuccResponse:
    t0 = time.perf_counter()
    E = req.ensemble.to_ensemble()
    with sdp.certification_log() as records:
        result = discrimination.psucc(E, gap_tol=req.tol)
    return PsuccResponse(
        command="psucc",
        inputs={"dim": E.dim, "n": E.n, "tol": req.tol},
        value=result.value,
        povm=PovmRecord.from_povm(result.povm),
        certificates=_certs(records),
        residuals=sdp.summarize_certificates(records),
        wall_time=time.perf_counter() - t0,
    )


def ensemble_from_map(req: EnsembleFromMapRequest) -> EnsembleFromMapResponse:
    t0 = time.perf_counter()
    gamma = req.map.to_map()
    with sdp.certification_log() as records:
        E = discrimination.ensemble_from_cp_map(gamma)
    return EnsembleFromMapResponse(
        command="ensemble-from-map",
        inputs={"d_in": gamma.d_in, "d_out": gamma.d_out},
        values={"n": E.n, "dim": E.dim},
        ensemble=EnsembleRecord.from_ensemble(E),
        certificates=_certs(records),
        residuals=sdp.summarize_certificates(records),
        wall_time=time.perf_counter() - t0,
    )


def deficiency_cmd(req: PairRequest) -> DeficiencyResponse:
    t0 = time.perf_counter()
    phi = req.phi.to_map()
    psi = req.psi.to_map()
    with sdp.certification_log() as records:
        res = deficiency.deficiency(phi, psi, gap_tol=req.tol)
    return DeficiencyResponse(
        command="deficiency",
        inputs={
            "d_in": phi.d_in,
            "d_out_phi": phi.d_out,
            "d_out_psi": psi.d_out,
            "tol": req.tol,
        },
        value=res.value,
        values={"certified_gap": res.certified_gap},
        postprocessing=MapRecord.from_map(res.optimal_postprocessing),
        witness=MapRecord.from_map(res.witness),
        certificates=_certs(records),
        residuals=sdp.summarize_certificates(records),
        wall_time=time.perf_counter() - t0,
    )


def lecam(req: PairRequest) -> Report:
    t0 = time.perf_counter()
    phi = req.phi.to_map()
    psi = req.psi.to_map()
    with sdp.certification_log() as records:
        d1, _ = deficiency.deficiency_value(phi, psi, gap_tol=req.tol)
        d2, _ = deficiency.deficiency_value(psi, phi, gap_tol=req.tol)
    return Report(
        command="lecam",
        inputs={
            "d_in": phi.d_in,
            "d_out_phi": phi.d_out,
            "d_out_psi": psi.d_out,
            "tol": req.tol,
        },
        value=max(d1, d2),
        values={"delta_phi_psi": d1, "delta_psi_phi": d2},
        certificates=_certs(records),
        residuals=sdp.summarize_certificates(records),
        wall_time=time.perf_counter() - t0,
    )


def exp_deficiency(req: ExpDeficiencyRequest) -> ExpDeficiencyResponse:
    t0 = time.perf_counter()
    S = req.s.to_experiment()
    T = req.t.to_experiment()
    with sdp.certification_log() as records:
        res = experiments.exp_deficiency(S, T, gap_tol=req.tol)
    return ExpDeficiencyResponse(
        command="exp-deficiency",
        inputs={
            "dim_s": S.dim,
            "dim_t": T.dim,
            "labels": list(S.labels),
            "tol": req.tol,
        },
        value=res.epsilon,
        randomization=MapRecord.from_map(res.alpha),
        certificates=_certs(records),
        residuals=sdp.summarize_certificates(records),
        wall_time=time.perf_counter() - t0,
    )


def lecam_classical(req: ExpDeficiencyRequest) -> Report:
    t0 = time.perf_counter()
    S = req.s.to_experiment()
    T = req.t.to_experiment()
    epsilon = experiments.classical_deficiency_lp(S, T)
    return Report(
        command="lecam-classical",
        inputs={"dim_s": S.dim, "dim_t": T.dim, "labels": list(S.labels)},
        value=epsilon,
        certificates=[],
        residuals={"solves": 0},
        wall_time=time.perf_counter() - t0,
    )


def verify_cmd(
    req: VerifyRequest,
    phi: MapRecord | None = None,
    psi: MapRecord | None = None,
) -> Report:
    t0 = time.perf_counter()
    kwargs: dict[str, Any] = {"seed": req.seed}
    if req.trials is not None:
        kwargs["trials"] = req.trials
    if req.tol is not None:
        kwargs["tol"] = req.tol
    if phi is not None:
        kwargs["phi"] = phi.to_map()
    if psi is not None:
        kwargs["psi"] = psi.to_map()
    report = verify.run_suite(req.suite, **kwargs)
    records = report.pop("records", [])
    return Report(
        command="verify",
        inputs={"suite": req.suite, "trials": req.trials, "seed": req.seed, "tol": req.tol},
        value=float(report.get("violations", 0)),
        values=report,
        certificates=_certs(records),
        residuals=report.get("certification"),
        wall_time=time.perf_counter() - t0,
    )


GEN_KINDS = ("channel", "cp-map", "hermitian-map", "ensemble", "experiment", "povm")


def gen(req: GenRequest) -> dict[str, Any]:
    """Seeded random artifact in the matching JSON wire format."""
    g = randomgen.rng(req.seed)
    if req.kind == "channel":
        return MapRecord.from_map(
            randomgen.random_channel(g, req.d_in, req.d_out)
        ).model_dump()
    if req.kind == "cp-map":
        return MapRecord.from_map(
            randomgen.random_cp_map(g, req.d_in, req.d_out)
        ).model_dump()
    if req.kind == "hermitian-map":
        return MapRecord.from_map(
            randomgen.random_hermitian_map(g, req.d_in, req.d_out)
        ).model_dump()
    if req.kind == "ensemble":
        w = randomgen.random_weights(g, req.n)
        states = [randomgen.random_state(g, req.d_in) for _ in range(req.n)]
        E = discrimination.Ensemble(tuple(float(x) for x in w), tuple(states))
        return EnsembleRecord.from_ensemble(E).model_dump()
    if req.kind == "experiment":
        labels = tuple(f"t{j}" for j in range(req.n))
        states = tuple(randomgen.random_state(g, req.d_in) for _ in range(req.n))
        T = experiments.Experiment(labels, states)
        return ExperimentRecord.from_experiment(T).model_dump()
    if req.kind == "povm":
        M = discrimination.Povm(tuple(randomgen.random_povm(g, req.d_in, req.n)))
        return PovmRecord.from_povm(M).model_dump()
    raise ValidationError(
        f"unknown kind {req.kind!r}; available: {', '.join(GEN_KINDS)}"
    )
