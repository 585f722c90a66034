"""Randomized verification suites for the norm and deficiency identities.

Each suite draws seeded random instances, checks one family of
identities or inequalities between independently formulated programs,
and returns a JSON-ready report: per-part worst errors against the
allowed tolerances, an overall pass flag, and the certification
summary of every semidefinite program solved along the way (the raw
records are kept so a caller can audit every optimal-status solve).
"""

from __future__ import annotations

from typing import Any, Callable

import numpy as np

from . import deficiency, discrimination, experiments, linalg, maps, norms, randomgen, sdp
from .discrimination import Ensemble
from .errors import ValidationError
from .experiments import Experiment
from .maps import HermitianMap


class Tally:
    """Accumulates named checks of the form error <= allowed."""

    def __init__(self) -> None:
        self.parts: dict[str, dict[str, float]] = {}

    def check(self, part: str, error: float, allowed: float) -> None:
        e = float(error)
        cur = self.parts.setdefault(
            part, {"checks": 0, "violations": 0, "max_error": -np.inf, "allowed": float(allowed)}
        )
        cur["checks"] += 1
        cur["max_error"] = max(cur["max_error"], e)
        cur["allowed"] = float(allowed)
        if e > allowed:
            cur["violations"] += 1

    def report(self, suite: str, **extra: Any) -> dict[str, Any]:
        checks = int(sum(p["checks"] for p in self.parts.values()))
        violations = int(sum(p["violations"] for p in self.parts.values()))
        return {
            "suite": suite,
            "checks": checks,
            "violations": violations,
            "pass": violations == 0,
            "parts": {k: dict(v) for k, v in self.parts.items()},
            **extra,
        }


def _finalize(report: dict[str, Any], records: list[dict[str, Any]]) -> dict[str, Any]:
    report["certification"] = sdp.summarize_certificates(records)
    report["records"] = [dict(r) for r in records]
    return report


def _qubit_tomographic_states() -> list[np.ndarray]:
    eye = np.eye(2, dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    return [eye / 2, (eye + x) / 2, (eye + y) / 2, (eye + z) / 2]


def suite_norms(trials: int = 100, seed: int = 101, tol: float = 1e-7) -> dict[str, Any]:
    """Pairing bounded by the norm product; CP closed forms match the SDPs."""
    tally = Tally()
    with sdp.certification_log() as records:
        g = randomgen.rng(seed)
        hmaps: list[HermitianMap] = []
        dn: list[float] = []
        dd: list[float] = []
        for st in randomgen.spawn_streams(g, trials):
            m = randomgen.random_hermitian_map(st, 2, 2)
            hmaps.append(m)
            dn.append(norms.diamond_norm(m))
            dd.append(norms.dual_diamond_norm(m))
        for i in range(trials):
            j = (i + 1) % trials
            lhs = abs(maps.pairing(hmaps[i], hmaps[j]))
            tally.check("pairing_bound", lhs - dn[i] * dd[j], tol)
        g2 = randomgen.rng(seed + 1)
        for st in randomgen.spawn_streams(g2, max(10, trials // 4)):
            cp = randomgen.random_cp_map(st, 2, 2, rank=int(st.integers(1, 5)))
            tally.check(
                "cp_diamond_closed_form",
                abs(norms.diamond_norm(cp) - norms.diamond_norm_cp(cp)),
                tol,
            )
            tally.check(
                "cp_dual_closed_form",
                abs(norms.dual_diamond_norm(cp) - norms.dual_diamond_norm_cp(cp)),
                tol,
            )
    return _finalize(tally.report("norms", trials=trials, seed=seed, tol=tol), records)


def suite_lemma4(trials: int = 50, seed: int = 102, tol: float = 1e-7) -> dict[str, Any]:
    """cq/qc closed forms and reduced programs match the generic SDPs."""
    tally = Tally()
    with sdp.certification_log() as records:
        g = randomgen.rng(seed)
        for st in randomgen.spawn_streams(g, trials):
            d = int(st.integers(2, 4))
            n = int(st.integers(1, 6 if d == 2 else 4))
            ops = [randomgen.random_hermitian(st, d) for _ in range(n)]
            cq_diamond, cq_dual = norms.cq_norms(ops)
            qc_diamond, qc_dual = norms.qc_norms(ops)
            phi_cq = maps.cq_map(ops)
            phi_qc = maps.qc_map(ops)
            tally.check("cq_diamond", abs(cq_diamond - norms.diamond_norm(phi_cq)), tol)
            tally.check("cq_dual", abs(cq_dual - norms.dual_diamond_norm(phi_cq)), tol)
            tally.check("qc_diamond", abs(qc_diamond - norms.diamond_norm(phi_qc)), tol)
            tally.check("qc_dual", abs(qc_dual - norms.dual_diamond_norm(phi_qc)), tol)
    return _finalize(tally.report("lemma4", trials=trials, seed=seed, tol=tol), records)


def suite_lemma5(
    trials: int = 100, seed: int = 103, tol: float = 1e-6, oracle_tol: float = 1e-8
) -> dict[str, Any]:
    """Guessing probability equals the dual norm of the ensemble map."""
    tally = Tally()
    with sdp.certification_log() as records:
        g = randomgen.rng(seed)
        for i, st in enumerate(randomgen.spawn_streams(g, trials)):
            if i % 3 == 0:
                n = 2
                d = int(st.integers(2, 4))
            else:
                d = 2 if st.random() < 0.7 else 3
                n = int(st.integers(2, 7 if d == 2 else 5))
            w = randomgen.random_weights(st, n)
            states = [randomgen.random_state(st, d) for _ in range(n)]
            E = Ensemble(tuple(float(x) for x in w), tuple(states))
            chk = discrimination.psucc_equals_dual_norm_check(E)
            tally.check("psucc_equals_dual_norm", abs(chk.diff), tol)
            if n == 2:
                tally.check(
                    "helstrom_oracle",
                    abs(chk.lhs - discrimination.helstrom_binary(E)),
                    oracle_tol,
                )
    return _finalize(tally.report("lemma5", trials=trials, seed=seed, tol=tol), records)


def suite_prop5(
    trials: int = 50, seed: int = 104, tol: float = 1e-6, cov_tol: float = 1e-9
) -> dict[str, Any]:
    """Dual norm via guessing probabilities and ensemble covariance."""
    tally = Tally()
    with sdp.certification_log() as records:
        g = randomgen.rng(seed)
        for st in randomgen.spawn_streams(g, trials):
            d_K = int(st.integers(2, 4))
            d_H = int(st.integers(2, 4))
            gamma = randomgen.random_cp_map(
                st, d_K, d_H, rank=int(st.integers(1, d_K * d_H + 1))
            )
            direct = norms.dual_diamond_norm_cp(gamma)
            via_guessing = discrimination.dual_norm_from_guessing(gamma)
            tally.check("dual_norm_via_guessing", abs(direct - via_guessing), tol)

            phi = randomgen.random_channel(st, d_H, int(st.integers(2, 4)))
            E_comp = discrimination.ensemble_from_cp_map(maps.compose(phi, gamma))
            E_push = discrimination.push_ensemble(
                phi, discrimination.ensemble_from_cp_map(gamma), ancilla=d_K
            )
            err = max(
                float(np.abs(a - b).max())
                for a, b in zip(E_comp.states, E_push.states)
            )
            err = max(
                err,
                max(abs(a - b) for a, b in zip(E_comp.weights, E_push.weights)),
            )
            tally.check("covariance", err, cov_tol)
        id2 = maps.identity_map(2)
        tally.check("id2_dual_sdp", abs(norms.dual_diamond_norm(id2) - 4.0), tol)
        tally.check(
            "id2_dual_guessing", abs(discrimination.dual_norm_from_guessing(id2) - 4.0), tol
        )
    return _finalize(tally.report("prop5", trials=trials, seed=seed, tol=tol), records)


def suite_thm1(
    trials: int = 50,
    seed: int = 105,
    tol: float = 1e-6,
    phi: HermitianMap | None = None,
    psi: HermitianMap | None = None,
    inner: int = 2,
) -> dict[str, Any]:
    """Minimax equality and the two randomization inequalities at epsilon = delta."""
    tally = Tally()
    with sdp.certification_log() as records:
        if (phi is None) != (psi is None):
            raise ValidationError("provide both channels or neither")
        if phi is not None and psi is not None:
            rep = deficiency.thm1_verify(phi, psi, trials=trials, seed=seed)
            tally.check("minimax_gap", rep["certified_gap"], tol)
            tally.check("slack_ii", -rep["min_slack_ii"], tol)
            tally.check("slack_iii", -rep["min_slack_iii"], tol)
            extra = {"delta": rep["delta"]}
        else:
            g = randomgen.rng(seed)
            for st in randomgen.spawn_streams(g, trials):
                a = randomgen.random_channel(st, 2, 2)
                b = randomgen.random_channel(st, 2, 2)
                rep = deficiency.thm1_verify(
                    a, b, trials=inner, seed=int(st.integers(0, 2**31))
                )
                tally.check("minimax_gap", rep["certified_gap"], tol)
                tally.check("slack_ii", -rep["min_slack_ii"], tol)
                tally.check("slack_iii", -rep["min_slack_iii"], tol)
            extra = {}
    return _finalize(
        tally.report("thm1", trials=trials, seed=seed, tol=tol, **extra), records
    )


def suite_bench(
    seed: int = 106, tol: float = 1e-7, depol_tol: float = 1e-5, trials: int = 5
) -> dict[str, Any]:
    """Benchmark deficiency values with independently known answers."""
    tally = Tally()
    with sdp.certification_log() as records:
        g = randomgen.rng(seed)
        for st in randomgen.spawn_streams(g, trials):
            d_H = int(st.integers(2, 4))
            d_K = int(st.integers(2, 4))
            phi = randomgen.random_channel(st, d_H, d_K)
            value, _ = deficiency.deficiency_value(phi, phi)
            tally.check("delta_self", value, tol)

            psi = randomgen.random_channel(st, d_H, d_K)
            alpha0 = randomgen.random_channel(st, d_K, int(st.integers(2, 4)))
            value, _ = deficiency.deficiency_value(maps.compose(alpha0, psi), psi)
            tally.check("delta_postprocessing", value, tol)
        id2 = maps.identity_map(2)
        depol = norms.erasure_map(np.eye(2, dtype=complex) / 2.0, 2)
        value, _ = deficiency.deficiency_value(id2, depol)
        tally.check("delta_id_vs_depolarizing", abs(value - 1.5), depol_tol)
    return _finalize(tally.report("bench", seed=seed, tol=tol, trials=trials), records)


def suite_prop7(trials: int = 20, seed: int = 107, tol: float = 1e-5) -> dict[str, Any]:
    """For measure-and-record channels the standard-basis POVM gap is the deficiency."""
    tally = Tally()
    with sdp.certification_log() as records:
        g = randomgen.rng(seed)
        for st in randomgen.spawn_streams(g, trials):
            d_H = int(st.integers(2, 4))
            k = int(st.integers(2, 4))
            phi = maps.qc_map(randomgen.random_povm(st, d_H, k))
            psi = randomgen.random_channel(st, d_H, int(st.integers(2, 4)))
            delta, _ = deficiency.deficiency_value(phi, psi)
            gap = deficiency.povm_postprocessing_gap(
                phi, psi, deficiency.standard_basis_povm(k)
            ).gap
            tally.check("qc_standard_basis_gap", abs(gap - delta), tol)
    return _finalize(tally.report("prop7", trials=trials, seed=seed, tol=tol), records)


def _random_diag_experiment(st: np.random.Generator, d: int, labels: list[str]) -> Experiment:
    states = [np.diag(st.dirichlet(np.ones(d)).astype(complex)) for _ in labels]
    return Experiment(tuple(labels), tuple(states))


def _random_experiment(st: np.random.Generator, d: int, labels: list[str]) -> Experiment:
    states = [randomgen.random_state(st, d) for _ in labels]
    return Experiment(tuple(labels), tuple(states))


def _random_block_diag_ensemble(
    st: np.random.Generator, n: int, d_K: int, k: int
) -> Ensemble:
    states = []
    for _ in range(k):
        blocks = [randomgen.random_psd(st, d_K) for _ in range(n)]
        total = sum(float(np.real(np.trace(B))) for B in blocks)
        full = np.zeros((n * d_K, n * d_K), dtype=complex)
        for j, B in enumerate(blocks):
            full[j * d_K : (j + 1) * d_K, j * d_K : (j + 1) * d_K] = B / total
        states.append(full)
    w = randomgen.random_weights(st, k)
    return Ensemble(tuple(float(x) for x in w), tuple(states))


def suite_thm4(
    seed: int = 108,
    lp_trials: int = 20,
    ensemble_trials: int = 100,
    decision_trials: int = 50,
    lp_tol: float = 1e-7,
    ensemble_tol: float = 1e-6,
    decision_tol: float = 1e-7,
    trials: int | None = None,
) -> dict[str, Any]:
    """Experiment deficiency: LP reduction, ensemble criterion, payoff criterion.

    ``trials`` scales all three part counts together when given.
    """
    if trials is not None:
        lp_trials = trials
        ensemble_trials = trials
        decision_trials = trials
    tally = Tally()
    with sdp.certification_log() as records:
        g = randomgen.rng(seed)
        for st in randomgen.spawn_streams(g, lp_trials):
            d_K = int(st.integers(2, 4))
            d_H = int(st.integers(2, 4))
            labels = [f"t{j}" for j in range(int(st.integers(2, 4)))]
            S = _random_diag_experiment(st, d_K, labels)
            T = _random_diag_experiment(st, d_H, labels)
            eps_sdp = experiments.exp_deficiency(S, T).epsilon
            eps_lp = experiments.classical_deficiency_lp(S, T)
            tally.check("classical_lp_match", abs(eps_sdp - eps_lp), lp_tol)

        pair_count = 5
        per_pair = max(1, ensemble_trials // pair_count)
        dec_per_pair = max(1, decision_trials // pair_count)
        g2 = randomgen.rng(seed + 1)
        for st in randomgen.spawn_streams(g2, pair_count):
            n = int(st.integers(2, 4))
            labels = [f"t{j}" for j in range(n)]
            d_K, d_H = 2, 2
            S = _random_experiment(st, d_K, labels)
            T = _random_experiment(st, d_H, labels)
            res = experiments.exp_deficiency(S, T)
            for _ in range(per_pair):
                E = _random_block_diag_ensemble(st, n, d_K, int(st.integers(2, 5)))
                gap = experiments.ensemble_criterion_gap(S, T, labels, E, res.epsilon)
                tally.check("ensemble_criterion_gap", gap, ensemble_tol)
            for _ in range(dec_per_pair):
                d_D = int(st.integers(2, 4))
                phi = randomgen.random_channel(st, d_K, d_D)
                G = experiments.QuantumDecisionSpace(
                    tuple(labels),
                    tuple(randomgen.random_psd(st, d_D) for _ in labels),
                )
                phi_prime = maps.compose(phi, res.alpha)
                for theta in labels:
                    p_S = experiments.quantum_payoff(S, theta, phi, G)
                    p_T = experiments.quantum_payoff(T, theta, phi_prime, G)
                    bound = res.epsilon * linalg.op_norm(G.payoff_for(theta))
                    tally.check("decision_space_slack", p_S - p_T - bound, decision_tol)
    return _finalize(
        tally.report(
            "thm4",
            seed=seed,
            lp_trials=lp_trials,
            ensemble_trials=ensemble_trials,
            decision_trials=decision_trials,
            tol=min(lp_tol, ensemble_tol, decision_tol),
        ),
        records,
    )


def suite_coro1(
    trials: int = 5,
    seed: int = 109,
    tol: float = 1e-6,
    phi: HermitianMap | None = None,
    psi: HermitianMap | None = None,
    inner: int = 4,
) -> dict[str, Any]:
    """Spanning-ancilla scan vanishes for genuine post-processings."""
    tally = Tally()
    with sdp.certification_log() as records:
        spanning = _qubit_tomographic_states()
        if (phi is None) != (psi is None):
            raise ValidationError("provide both channels or neither")
        if phi is not None and psi is not None:
            rep = deficiency.thm2_coro1_scan(phi, psi, spanning, trials=trials, seed=seed)
            tally.check("scan_gap", rep["max_gap"], tol)
        else:
            g = randomgen.rng(seed)
            for st in randomgen.spawn_streams(g, trials):
                psi_r = randomgen.random_channel(st, 2, 2)
                alpha0 = randomgen.random_channel(st, 2, 2)
                phi_r = maps.compose(alpha0, psi_r)
                rep = deficiency.thm2_coro1_scan(
                    phi_r, psi_r, spanning, trials=inner, seed=int(st.integers(0, 2**31))
                )
                tally.check("randomization_scan_gap", rep["max_gap"], tol)
    return _finalize(tally.report("coro1", trials=trials, seed=seed, tol=tol), records)


def suite_coro2(
    trials: int = 5, seed: int = 110, tol: float = 1e-6, inner: int = 2
) -> dict[str, Any]:
    """Complete-experiment mixture scan vanishes for randomizations."""
    tally = Tally()
    with sdp.certification_log() as records:
        S0 = Experiment(
            ("m0", "m1", "m2", "m3"), tuple(_qubit_tomographic_states())
        )
        g = randomgen.rng(seed)
        for st in randomgen.spawn_streams(g, trials):
            n = int(st.integers(2, 4))
            labels = [f"t{j}" for j in range(n)]
            T = _random_experiment(st, 2, labels)
            alpha0 = randomgen.random_channel(st, 2, 2)
            S = Experiment(
                tuple(labels), tuple(maps.apply(alpha0, r) for r in T.states)
            )
            rep = experiments.coro2_scan(
                S, T, S0, trials=inner, seed=int(st.integers(0, 2**31))
            )
            tally.check("randomization_scan_gap", rep["max_gap"], tol)
    return _finalize(tally.report("coro2", trials=trials, seed=seed, tol=tol), records)


SUITES: dict[str, Callable[..., dict[str, Any]]] = {
    "norms": suite_norms,
    "lemma4": suite_lemma4,
    "lemma5": suite_lemma5,
    "prop5": suite_prop5,
    "thm1": suite_thm1,
    "bench": suite_bench,
    "prop7": suite_prop7,
    "thm4": suite_thm4,
    "coro1": suite_coro1,
    "coro2": suite_coro2,
}


def run_suite(name: str, **kwargs: Any) -> dict[str, Any]:
    """Dispatch a named suite, dropping None-valued keyword overrides."""
    if name not in SUITES:
        raise ValidationError(
            f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}"
        )
    clean = {k: v for k, v in kwargs.items() if v is not None}
    return SUITES[name](**clean)
