"""Channel deficiency, Le Cam distance, and randomization criteria.

The deficiency of Phi with respect to Psi is the smallest diamond-norm
error achievable by post-processing Psi:

    delta(Phi, Psi) = min { ||Phi - alpha o Psi||_D : alpha a channel }.

It is computed as a single joint SDP: the Choi matrix of alpha and the
diamond-norm epigraph variables live in one program, which is jointly
convex (alternating schemes have no convergence certificate and are
deliberately avoided). A second, independent SDP maximizes the minimax
witness 2(<gamma, Phi> - ||Psi o gamma||^D) over CP maps gamma with
dual diamond norm at most 1; at the optimum the two values coincide,
and the pair (alpha, gamma) certifies delta from both sides.

The scans in this module sample randomized comparison criteria
(guessing-probability inequalities, cq/qc norm inequalities, POVM
post-processing gaps). They report statistics and never claim converse
implications: sampling yields lower bounds, only the SDPs certify.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, NamedTuple, Sequence

import numpy as np

from . import discrimination, linalg, maps, norms, randomgen, sdp
from .errors import DimensionMismatch, MaxIterations, QcompError
from .discrimination import Ensemble, Povm
from .maps import HermitianMap


@lru_cache(maxsize=None)
def _basis(n: int) -> tuple[np.ndarray, ...]:
    return tuple(linalg.herm_basis(n))


def _link_right_adjoint(F: np.ndarray, psi: HermitianMap, d_K: int) -> np.ndarray:
    """Adjoint of A -> C(alpha o psi) acting on coefficients F.

    Here alpha: K' -> K is the variable (Choi on K (x) K') and psi is
    fixed with Choi on K' (x) H; F is a Hermitian coefficient on
    K (x) H. Returns the matching coefficient on K (x) K'.
    """
    d_Kp, d_H = psi.d_out, psi.d_in
    F4 = F.reshape(d_K, d_H, d_K, d_H)
    CP4 = psi.choi_tensor()
    K4 = np.einsum("njmi,aibj->nbma", F4, CP4)
    n = d_K * d_Kp
    return linalg.hermitize(K4.reshape(n, n))


def _link_left_adjoint(F: np.ndarray, psi: HermitianMap, d_K: int) -> np.ndarray:
    """Adjoint of G -> C(psi o gamma) acting on coefficients F.

    Here gamma: K -> H is the variable (Choi on H (x) K) and psi is
    fixed with Choi on K' (x) H; F is a Hermitian coefficient on
    K' (x) K. Returns the matching coefficient on H (x) K.
    """
    d_Kp, d_H = psi.d_out, psi.d_in
    F4 = F.reshape(d_Kp, d_K, d_Kp, d_K)
    CP4 = psi.choi_tensor()
    K4 = np.einsum("njmi,manb->bjai", F4, CP4)
    n = d_H * d_K
    return linalg.hermitize(K4.reshape(n, n))


def _clip_cp(phi: HermitianMap) -> HermitianMap:
    """Zero out negative Choi eigenvalues left by solver rounding."""
    w, V = linalg.herm_eig(phi.choi)
    C = (V * np.clip(w, 0.0, None)) @ V.conj().T
    return HermitianMap(phi.d_in, phi.d_out, C)


@dataclass(frozen=True)
class DeficiencyResult:
    """Two-sided certificate for a deficiency computation.

    ``value`` solves the post-processing minimization;
    ``optimal_postprocessing`` is the achieving channel alpha;
    ``witness`` is a CP map gamma with dual diamond norm <= 1 whose
    recomputed objective 2(<gamma,Phi> - ||Psi o gamma||^D) differs
    from ``value`` by at most ``certified_gap``.
    """

    value: float
    optimal_postprocessing: HermitianMap
    witness: HermitianMap
    certified_gap: float


def _check_pair(phi: HermitianMap, psi: HermitianMap) -> None:
    maps.require_channel(phi)
    maps.require_channel(psi)
    if phi.d_in != psi.d_in:
        raise DimensionMismatch(
            f"channels must share the input space, got {phi.d_in} and {psi.d_in}"
        )


def deficiency_value(
    phi: HermitianMap, psi: HermitianMap, gap_tol: float | None = None
) -> tuple[float, HermitianMap]:
    """Joint SDP for delta(phi, psi); returns the value and alpha.

    Variables: A = C(alpha) >= 0 with unit output marginal,
    P = B - C(phi - alpha o psi) >= 0, Q = B + C(phi - alpha o psi) >= 0
    with B the epigraph Choi matrix, and the scalar lambda pinning
    Tr_out B = lambda I.
    """
    _check_pair(phi, psi)
    d_H, d_K, d_Kp = phi.d_in, phi.d_out, psi.d_out
    n = d_K * d_H
    n_A = d_K * d_Kp
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    # Blocks: 0 = A, 1 = P, 2 = Q, 3 = lambda.
    eye_K = np.eye(d_K, dtype=complex)
    for G in _basis(d_Kp):
        constraints.append(({0: np.kron(eye_K, G)}, float(np.real(np.trace(G)))))
    for F in _basis(n):
        # Q - P = 2 C(phi) - 2 C(alpha o psi), moved to the left side.
        coeff_A = 2.0 * _link_right_adjoint(F, psi, d_K)
        rhs = 2.0 * float(np.real(np.trace(F @ phi.choi)))
        constraints.append(({1: -F, 2: F, 0: coeff_A}, rhs))
    eye_out = np.eye(d_K, dtype=complex)
    for G in _basis(d_H):
        A = np.kron(eye_out, G) / 2.0
        constraints.append(({1: A, 2: A, 3: -np.real(np.trace(G)) * np.ones((1, 1))}, 0.0))
    problem = sdp.SdpProblem(
        blocks=(n_A, n, n, 1),
        objective={3: np.ones((1, 1))},
        constraints=constraints,
        sense="minimize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="deficiency SDP")
    alpha_raw = HermitianMap(d_Kp, d_K, sol.X[0])
    alpha, shift = maps.project_to_channel(alpha_raw)
    if shift > 1e-7:
        raise MaxIterations(
            f"optimal post-processing needed a re-projection of size {shift:.2e}"
        )
    value = max(0.0, float(sol.primal_value))
    return (0.0 if value < norms.CLAMP else value), alpha


def deficiency_witness(
    phi: HermitianMap, psi: HermitianMap, gap_tol: float | None = None
) -> tuple[HermitianMap, float]:
    """Maximize 2(<gamma, phi> - ||psi o gamma||^D) over admissible gamma.

    gamma ranges over CP maps K -> H with dual diamond norm at most 1,
    written as rho >= 0, Tr rho <= 1, rho (x) I >= C(gamma); the norm
    of psi o gamma is handled by its own erasure epigraph tau.
    """
    _check_pair(phi, psi)
    d_H, d_K, d_Kp = phi.d_in, phi.d_out, psi.d_out
    n_G = d_H * d_K
    n_Q = d_Kp * d_K
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    # Blocks: 0 = G (Choi of gamma), 1 = rho, 2 = slack, 3 = P, 4 = tau, 5 = Q.
    for F in _basis(n_G):
        marg = linalg.partial_trace(F, (d_H, d_K), "second")
        constraints.append(({3: F, 0: F, 1: -marg}, 0.0))
    constraints.append(({1: np.eye(d_H, dtype=complex), 2: np.ones((1, 1))}, 1.0))
    for F in _basis(n_Q):
        marg = linalg.partial_trace(F, (d_Kp, d_K), "second")
        constraints.append(({5: F, 0: _link_left_adjoint(F, psi, d_K), 4: -marg}, 0.0))
    objective = {
        0: 2.0 * maps.adjoint(phi).choi,
        4: -2.0 * np.eye(d_Kp, dtype=complex),
    }
    problem = sdp.SdpProblem(
        blocks=(n_G, d_H, 1, n_G, d_Kp, n_Q),
        objective=objective,
        constraints=constraints,
        sense="maximize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="deficiency witness SDP")
    gamma = _clip_cp(HermitianMap(d_K, d_H, sol.X[0]))
    # Rescale so the dual-norm cap holds exactly, not just within solver slack.
    norm = norms.dual_diamond_norm_cp(gamma)
    if norm > 1.0:
        gamma = gamma * (1.0 / norm)
    return gamma, max(0.0, float(sol.primal_value))


def witness_objective(gamma: HermitianMap, phi: HermitianMap, psi: HermitianMap) -> float:
    """Recompute 2(<gamma, phi> - ||psi o gamma||^D) from scratch."""
    return 2.0 * (
        maps.pairing(gamma, phi) - norms.dual_diamond_norm_cp(maps.compose(psi, gamma))
    )


def deficiency(
    phi: HermitianMap, psi: HermitianMap, gap_tol: float | None = None
) -> DeficiencyResult:
    """delta(phi, psi) with a two-sided certificate.

    The minimization and the witness maximization are solved as two
    independent SDPs; ``certified_gap`` is the difference between the
    minimization value and the witness objective recomputed from the
    returned gamma, so it bounds the distance to the true value.
    """
    value, alpha = deficiency_value(phi, psi, gap_tol=gap_tol)
    gamma, _ = deficiency_witness(phi, psi, gap_tol=gap_tol)
    certified = abs(value - witness_objective(gamma, phi, psi))
    return DeficiencyResult(
        value=value,
        optimal_postprocessing=alpha,
        witness=gamma,
        certified_gap=float(certified),
    )


def lecam_distance(phi: HermitianMap, psi: HermitianMap, gap_tol: float | None = None) -> float:
    """Symmetrized deficiency max(delta(phi,psi), delta(psi,phi))."""
    d1, _ = deficiency_value(phi, psi, gap_tol=gap_tol)
    d2, _ = deficiency_value(psi, phi, gap_tol=gap_tol)
    return max(d1, d2)


def data_processing_check(
    phi2: HermitianMap, psi: HermitianMap, beta: HermitianMap
) -> tuple[float, float]:
    """delta(beta o phi2, psi) vs delta(phi2, psi); the first is never larger."""
    maps.require_channel(beta)
    phi1 = maps.compose(beta, phi2)
    d1, _ = deficiency_value(phi1, psi)
    d2, _ = deficiency_value(phi2, psi)
    if d1 > d2 + 1e-7:
        raise QcompError(
            f"monotonicity violated: delta(beta o phi2, psi) = {d1} > {d2} = delta(phi2, psi)"
        )
    return d1, d2


def data_processing_check_dual(
    phi: HermitianMap, psi2: HermitianMap, beta: HermitianMap
) -> tuple[float, float]:
    """delta(phi, beta o psi2) vs delta(phi, psi2); the first is never smaller."""
    maps.require_channel(beta)
    psi1 = maps.compose(beta, psi2)
    d1, _ = deficiency_value(phi, psi1)
    d2, _ = deficiency_value(phi, psi2)
    if d1 < d2 - 1e-7:
        raise QcompError(
            f"monotonicity violated: delta(phi, beta o psi2) = {d1} < {d2} = delta(phi, psi2)"
        )
    return d1, d2


class PovmGapResult(NamedTuple):
    gap: float
    povm: Povm


def povm_postprocessing_gap(
    phi: HermitianMap, psi: HermitianMap, M: Povm, gap_tol: float | None = None
) -> PovmGapResult:
    """min over POVMs N of the diamond distance of the measured maps.

    Minimizes ||qc(phi*(M)) - qc(psi*(N))||_D jointly over POVMs N on
    psi's output. The diamond-norm epigraph exploits the qc structure:
    the dominating Choi matrix can be taken block diagonal, leaving one
    Hermitian block B_i per outcome with B_i -+ D_i >= 0 and
    sum_i B_i = lambda I, where D_i = phi*(M_i) - psi*(N_i).
    """
    _check_pair(phi, psi)
    if M.dim != phi.d_out:
        raise DimensionMismatch(
            f"POVM dimension {M.dim} does not match the first channel output {phi.d_out}"
        )
    k = M.n
    d_H, d_Kp = phi.d_in, psi.d_out
    phi_adj = maps.adjoint(phi)
    psi_adj = maps.adjoint(psi)
    targets = [linalg.hermitize(maps.apply(phi_adj, Mi)) for Mi in M.elements]

    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    # Blocks: N_1..N_k on K', then per outcome P_i, Q_i on H, then lambda.
    def nb(i: int) -> int:
        return i

    def pb(i: int) -> int:
        return k + 2 * i

    def qb(i: int) -> int:
        return k + 2 * i + 1

    lam = 3 * k
    for G in _basis(d_Kp):
        constraints.append(({nb(i): G for i in range(k)}, float(np.real(np.trace(G)))))
    for i in range(k):
        for F in _basis(d_H):
            # Q_i - P_i + 2 psi*(N_i) = 2 phi*(M_i); the N_i coefficient
            # of <F, psi*(N_i)> is psi(F).
            coeff_N = 2.0 * linalg.hermitize(maps.apply(psi, F))
            rhs = 2.0 * float(np.real(np.trace(F @ targets[i])))
            constraints.append(({pb(i): -F, qb(i): F, nb(i): coeff_N}, rhs))
    for G in _basis(d_H):
        row = {pb(i): G / 2.0 for i in range(k)}
        row.update({qb(i): G / 2.0 for i in range(k)})
        row[lam] = -np.real(np.trace(G)) * np.ones((1, 1))
        constraints.append((row, 0.0))
    problem = sdp.SdpProblem(
        blocks=(d_Kp,) * k + (d_H, d_H) * k + (1,),
        objective={lam: np.ones((1, 1))},
        constraints=constraints,
        sense="minimize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="POVM post-processing SDP")
    N = discrimination._repair_povm(sol.X[:k])
    gap = float(sol.primal_value)
    return PovmGapResult(0.0 if abs(gap) < norms.CLAMP else max(0.0, gap), N)


def standard_basis_povm(d: int) -> Povm:
    """The POVM of rank-one standard-basis projectors."""
    els = []
    for i in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[i, i] = 1.0
        els.append(E)
    return Povm(tuple(els))


def classical_comparison_scan(
    phi: HermitianMap,
    psi: HermitianMap,
    k: int,
    trials: int,
    seed: int,
    gap_tol: float | None = None,
) -> dict[str, Any]:
    """Sampled statistics for the four no-ancilla comparison criteria.

    Reports, over random k-element instances, the largest epsilon
    demanded by (i) guessing probabilities, (ii) CP cq maps,
    (iii) Hermitian cq collections (with the factor 2), and (iv) POVM
    post-processing gaps halved. (i)-(iii) are sampled lower bounds on
    the best epsilon; each (iv) sample solves its inner SDP exactly.
    The scan makes no completeness claim for any fixed k.
    """
    _check_pair(phi, psi)
    if k < 1:
        raise DimensionMismatch(f"k must be >= 1, got {k}")
    d_H, d_K = phi.d_in, phi.d_out
    g = randomgen.rng(seed)
    streams = randomgen.spawn_streams(g, trials)
    stat_i = stat_ii = stat_iii = stat_iv = -np.inf
    for t, st in enumerate(streams):
        # (i) random ensembles on the input space, no ancilla.
        E = Ensemble(
            tuple(randomgen.random_weights(st, k)),
            tuple(randomgen.random_state(st, d_H) for _ in range(k)),
        )
        p_e = discrimination.psucc(E, gap_tol=gap_tol).value
        p_phi = discrimination.psucc(
            discrimination.push_ensemble(phi, E), gap_tol=gap_tol
        ).value
        p_psi = discrimination.psucc(
            discrimination.push_ensemble(psi, E), gap_tol=gap_tol
        ).value
        stat_i = max(stat_i, (p_phi - p_psi) / p_e)

        # (ii) CP cq maps gamma = cq(F) with PSD F_i.
        Fs = [randomgen.random_psd(st, d_H) / d_H for _ in range(k)]
        base = norms.cq_norms(Fs, gap_tol=gap_tol)[1]
        lhs = norms.cq_norms([maps.apply(phi, F) for F in Fs], gap_tol=gap_tol)[1]
        rhs = norms.cq_norms([maps.apply(psi, F) for F in Fs], gap_tol=gap_tol)[1]
        stat_ii = max(stat_ii, (lhs - rhs) / base)

        # (iii) Hermitian collections, factor 2.
        Hs = [randomgen.random_hermitian(st, d_H) for _ in range(k)]
        base = norms.cq_norms(Hs, gap_tol=gap_tol)[1]
        lhs = norms.cq_norms([maps.apply(phi, H) for H in Hs], gap_tol=gap_tol)[1]
        rhs = norms.cq_norms([maps.apply(psi, H) for H in Hs], gap_tol=gap_tol)[1]
        stat_iii = max(stat_iii, (lhs - rhs) / (2.0 * base))

        # (iv) POVM gaps; the first trial always tries the standard basis
        # when k matches the output dimension.
        if t == 0 and k == d_K:
            M = standard_basis_povm(d_K)
        else:
            M = Povm(tuple(randomgen.random_povm(st, d_K, k)))
        stat_iv = max(
            stat_iv, povm_postprocessing_gap(phi, psi, M, gap_tol=gap_tol).gap / 2.0
        )
    return {
        "k": k,
        "trials": trials,
        "seed": seed,
        "stat_i": float(stat_i),
        "stat_ii": float(stat_ii),
        "stat_iii": float(stat_iii),
        "stat_iv": float(stat_iv),
    }


def thm1_verify(
    phi: HermitianMap,
    psi: HermitianMap,
    trials: int,
    seed: int,
    gap_tol: float | None = None,
) -> dict[str, Any]:
    """Randomized check of the minimax deficiency characterization.

    Computes delta by SDP, then verifies on sampled CP maps gamma that
    ||phi o gamma||^D <= ||psi o gamma||^D + (delta/2) ||gamma||^D and
    the matching guessing-probability inequality on the canonical
    ensembles E_gamma, and that the optimal witness saturates the
    minimax value.
    """
    result = deficiency(phi, psi, gap_tol=gap_tol)
    delta = result.value
    d_K = phi.d_out
    g = randomgen.rng(seed)
    streams = randomgen.spawn_streams(g, trials)
    min_slack_ii = np.inf
    min_slack_iii = np.inf
    for st in streams:
        gamma = randomgen.random_cp_map(st, d_K, phi.d_in, rank=int(st.integers(1, d_K * phi.d_in + 1)))
        norm_gamma = norms.dual_diamond_norm_cp(gamma, gap_tol=gap_tol)
        lhs = norms.dual_diamond_norm_cp(maps.compose(phi, gamma), gap_tol=gap_tol)
        rhs = norms.dual_diamond_norm_cp(maps.compose(psi, gamma), gap_tol=gap_tol)
        min_slack_ii = min(min_slack_ii, rhs + (delta / 2.0) * norm_gamma - lhs)

        E = discrimination.ensemble_from_cp_map(gamma)
        p_e = discrimination.psucc(E, gap_tol=gap_tol).value
        p_phi = discrimination.psucc(
            discrimination.push_ensemble(phi, E, ancilla=d_K), gap_tol=gap_tol
        ).value
        p_psi = discrimination.psucc(
            discrimination.push_ensemble(psi, E, ancilla=d_K), gap_tol=gap_tol
        ).value
        min_slack_iii = min(min_slack_iii, p_psi + (delta / 2.0) * p_e - p_phi)
    return {
        "trials": trials,
        "seed": seed,
        "delta": delta,
        "certified_gap": result.certified_gap,
        "min_slack_ii": float(min_slack_ii),
        "min_slack_iii": float(min_slack_iii),
    }


def thm2_coro1_scan(
    phi: HermitianMap,
    psi: HermitianMap,
    spanning_states: Sequence[np.ndarray],
    trials: int,
    seed: int,
    gap_tol: float | None = None,
) -> dict[str, Any]:
    """Product-form ensemble scan for the spanning-ancilla criterion.

    Ensembles have states sum_j rho^i_j (x) sigma_j with the sigma_j a
    fixed family spanning the Hermitian operators on the ancilla copy
    of the output space; reports the worst guessing-probability gap.
    """
    _check_pair(phi, psi)
    d_K = phi.d_out
    sigmas = [discrimination._clean_state(s, what="spanning state") for s in spanning_states]
    require_spanning(sigmas, d_K)
    m = d_K * d_K
    g = randomgen.rng(seed)
    streams = randomgen.spawn_streams(g, trials)
    max_gap = -np.inf
    for st in streams:
        states = []
        for _ in range(m):
            parts = [randomgen.random_psd(st, phi.d_in) for _ in sigmas]
            total = sum(float(np.real(np.trace(P))) for P in parts)
            rho = sum(
                np.kron(P / total, s) for P, s in zip(parts, sigmas)
            )
            states.append(rho)
        E = Ensemble((1.0 / m,) * m, tuple(states))
        p_phi = discrimination.psucc(
            discrimination.push_ensemble(phi, E, ancilla=d_K), gap_tol=gap_tol
        ).value
        p_psi = discrimination.psucc(
            discrimination.push_ensemble(psi, E, ancilla=d_K), gap_tol=gap_tol
        ).value
        max_gap = max(max_gap, p_phi - p_psi)
    return {"trials": trials, "seed": seed, "max_gap": float(max_gap)}


def require_spanning(states: Sequence[np.ndarray], d: int) -> None:
    """Raise NotSpanning unless the states span the Hermitian d x d space."""
    from .errors import NotSpanning

    if len(states) < d * d:
        raise NotSpanning(f"need at least {d * d} states, got {len(states)}")
    basis = _basis(d)
    V = np.array(
        [[float(np.real(np.trace(F @ s))) for F in basis] for s in states]
    )
    sv = np.linalg.svd(V, compute_uv=False)
    if sv.size == 0 or int((sv > 1e-9 * sv[0]).sum()) < d * d:
        raise NotSpanning("states do not span the Hermitian operator space")
