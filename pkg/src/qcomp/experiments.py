"""Quantum statistical experiments and their comparison.

An experiment is a finite labeled family of states. The deficiency
between experiments S and T is computed by one SDP that searches for a
randomizing channel alpha together with per-label trace-norm epigraph
variables: sigma_theta - alpha(rho_theta) = P_theta - N_theta with
Tr[P_theta + N_theta] <= t, minimizing t and reporting epsilon = t/2.
For simultaneously diagonal (classical) experiments the same program
reduces to the classical Le Cam criterion, and an independent linear
program over stochastic matrices is provided as a cross-check.

Decision problems connect experiments to guessing probabilities: a
finitely supported prior and a nonnegative payoff table convert to a
classical ensemble whose mixtures against the experiment states turn
payoff comparisons into P_succ comparisons. Infinite parameter sets
are out of scope; everything here is finite by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

from . import discrimination, linalg, maps, randomgen, sdp
from .discrimination import Ensemble, Povm
from .errors import (
    DegeneratePayoff,
    DimensionMismatch,
    LabelMismatch,
    LabelUnknown,
    MaxIterations,
    NotComplete,
    ShapeError,
    SizeMismatch,
    ValidationError,
)
from .maps import HermitianMap

CLAMP = 1e-10


@lru_cache(maxsize=None)
def _basis(n: int) -> tuple[np.ndarray, ...]:
    return tuple(linalg.herm_basis(n))


@dataclass(frozen=True)
class Experiment:
    """Finite labeled family of density matrices on one space."""

    labels: tuple[str, ...]
    states: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if not self.labels or len(self.labels) != len(self.states):
            raise DimensionMismatch("labels and states must align and be nonempty")
        labels = tuple(str(lbl) for lbl in self.labels)
        if len(set(labels)) != len(labels):
            raise ValidationError("experiment labels must be distinct")
        d = linalg.as_matrix(self.states[0]).shape[0]
        cleaned = []
        for lbl, s in zip(labels, self.states):
            S = discrimination._clean_state(s, what=f"state {lbl!r}")
            if S.shape != (d, d):
                raise DimensionMismatch("experiment states must share one dimension")
            cleaned.append(S)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "states", tuple(cleaned))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def state_for(self, label: str) -> np.ndarray:
        try:
            return self.states[self.labels.index(str(label))]
        except ValueError:
            raise LabelUnknown(f"label {label!r} is not in the experiment") from None


@dataclass(frozen=True)
class DecisionProblem:
    """Nonnegative payoff table g(theta, d) over labels x decisions."""

    labels: tuple[str, ...]
    decisions: tuple[str, ...]
    table: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        labels = tuple(str(x) for x in self.labels)
        decisions = tuple(str(x) for x in self.decisions)
        T = np.asarray(self.table, dtype=float)
        if T.shape != (len(labels), len(decisions)):
            raise ShapeError(
                f"payoff table shape {T.shape} does not match {len(labels)} x {len(decisions)}"
            )
        if not labels or not decisions:
            raise DimensionMismatch("need at least one label and one decision")
        if np.any(T < 0.0):
            raise ValidationError("payoff entries must be nonnegative")
        T = T.copy()
        T.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "decisions", decisions)
        object.__setattr__(self, "table", T)

    def value(self, label: str, decision: str) -> float:
        try:
            i = self.labels.index(str(label))
        except ValueError:
            raise LabelUnknown(f"label {label!r} is not in the payoff table") from None
        try:
            j = self.decisions.index(str(decision))
        except ValueError:
            raise LabelUnknown(f"decision {decision!r} is not in the payoff table") from None
        return float(self.table[i, j])


@dataclass(frozen=True)
class QuantumDecisionSpace:
    """Matrix-valued payoff: label -> PSD operator on the decision space."""

    labels: tuple[str, ...]
    payoffs: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self) -> None:
        labels = tuple(str(x) for x in self.labels)
        if not labels or len(labels) != len(self.payoffs):
            raise DimensionMismatch("labels and payoffs must align and be nonempty")
        d = linalg.as_matrix(self.payoffs[0]).shape[0]
        cleaned = []
        for lbl, G in zip(labels, self.payoffs):
            A = linalg.require_hermitian(G, what=f"payoff {lbl!r}")
            if A.shape != (d, d):
                raise DimensionMismatch("payoff operators must share one dimension")
            if linalg.min_eig(A, tol=np.inf) < -1e-8:
                raise ValidationError(f"payoff {lbl!r} is not PSD within tolerance")
            A.setflags(write=False)
            cleaned.append(A)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "payoffs", tuple(cleaned))

    @property
    def dim(self) -> int:
        return self.payoffs[0].shape[0]

    def payoff_for(self, label: str) -> np.ndarray:
        try:
            return self.payoffs[self.labels.index(str(label))]
        except ValueError:
            raise LabelUnknown(f"label {label!r} has no payoff operator") from None


@dataclass(frozen=True)
class Prior:
    """Finitely supported probability weights over labels."""

    labels: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        labels = tuple(str(x) for x in self.labels)
        w = np.asarray(self.weights, dtype=float)
        if not labels or w.shape != (len(labels),):
            raise DimensionMismatch("labels and weights must align and be nonempty")
        if np.any(w < 0.0):
            raise ValidationError("prior weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValidationError(f"prior weights sum to {w.sum():.15f}, expected 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    def weight(self, label: str) -> float:
        try:
            return self.weights[self.labels.index(str(label))]
        except ValueError:
            raise LabelUnknown(f"label {label!r} is not in the prior") from None

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(l for l, w in zip(self.labels, self.weights) if w > 0.0)


def payoff(T: Experiment, theta: str, M: Povm, g: DecisionProblem) -> float:
    """Average payoff sum_d g(theta, d) Tr[rho_theta M_d]."""
    if M.n != len(g.decisions):
        raise SizeMismatch(
            f"POVM has {M.n} outcomes but the problem has {len(g.decisions)} decisions"
        )
    rho = T.state_for(theta)
    if M.dim != T.dim:
        raise SizeMismatch(f"POVM dimension {M.dim} does not match experiment dim {T.dim}")
    return float(
        sum(
            g.value(theta, d) * float(np.real(np.trace(rho @ M.elements[j])))
            for j, d in enumerate(g.decisions)
        )
    )


def quantum_payoff(
    T: Experiment, theta: str, phi: HermitianMap, G: QuantumDecisionSpace
) -> float:
    """Tr[phi(rho_theta) G(theta)] for a channel into the decision space."""
    rho = T.state_for(theta)
    if phi.d_in != T.dim:
        raise DimensionMismatch(f"channel input {phi.d_in} does not match experiment {T.dim}")
    if phi.d_out != G.dim:
        raise DimensionMismatch(f"channel output {phi.d_out} does not match payoff {G.dim}")
    return float(np.real(np.trace(maps.apply(phi, rho) @ G.payoff_for(theta))))


def decision_to_ensemble(
    p: Prior, D: Sequence[str], g: DecisionProblem, T: Experiment
) -> Ensemble:
    """Classical ensemble {lambda_d, diag(mu^d)} encoding a Bayes problem.

    lambda_d is proportional to c_d = sum_theta p(theta) g(theta, d)
    and mu^d_theta = p(theta) g(theta, d) / c_d over the prior support
    (in prior order); decisions with c_d = 0 are dropped.
    """
    support = p.support
    if not support:
        raise ValidationError("prior has empty support")
    for theta in support:
        T.state_for(theta)
        if str(theta) not in g.labels:
            raise LabelUnknown(f"label {theta!r} missing from the payoff table")
    decisions = [str(d) for d in D]
    for d in decisions:
        if d not in g.decisions:
            raise LabelUnknown(f"decision {d!r} is not in the payoff table")
    c = {
        d: sum(p.weight(theta) * g.value(theta, d) for theta in support) for d in decisions
    }
    Z = sum(c.values())
    if Z <= 0.0:
        raise DegeneratePayoff("payoff is zero on the whole prior support")
    weights = []
    states = []
    n = len(support)
    for d in decisions:
        if c[d] <= 0.0:
            continue
        mu = np.array([p.weight(theta) * g.value(theta, d) / c[d] for theta in support])
        weights.append(c[d] / Z)
        states.append(np.diag(mu.astype(complex)))
    return Ensemble(tuple(weights), tuple(states))


def ensemble_to_decision(
    E: Ensemble, labels: Sequence[str]
) -> tuple[Prior, DecisionProblem]:
    """Inverse conversion: a diagonal ensemble back to (prior, payoff).

    The states of E must be diagonal in the standard basis with one
    entry per label. Decisions are numbered by position in E.
    """
    labels = tuple(str(x) for x in labels)
    if len(labels) != E.dim:
        raise ShapeError(f"{len(labels)} labels for states of dimension {E.dim}")
    mus = []
    for i, s in enumerate(E.states):
        if float(np.abs(s - np.diag(np.diag(s))).max()) > 1e-10:
            raise ShapeError(f"state {i} is not diagonal")
        mus.append(np.real(np.diag(s)))
    lam = np.asarray(E.weights)
    marg = sum(l * mu for l, mu in zip(lam, mus))
    if np.any(marg <= 0.0):
        raise ValidationError("every label needs positive marginal probability")
    table = np.stack([lam[d] * mus[d] / marg for d in range(E.n)], axis=1)
    prior = Prior(labels, tuple(float(x) for x in marg))
    problem = DecisionProblem(labels, tuple(str(d) for d in range(E.n)), table)
    return prior, problem


class ExpDeficiencyResult(NamedTuple):
    epsilon: float
    alpha: HermitianMap


def _match_labels(S: Experiment, T: Experiment) -> list[tuple[np.ndarray, np.ndarray]]:
    if set(S.labels) != set(T.labels):
        raise LabelMismatch(
            f"experiments have different label sets: {sorted(S.labels)} vs {sorted(T.labels)}"
        )
    return [(S.state_for(lbl), T.state_for(lbl)) for lbl in S.labels]


def exp_deficiency(
    S: Experiment, T: Experiment, gap_tol: float | None = None
) -> ExpDeficiencyResult:
    """Least epsilon with sup_theta ||sigma_theta - alpha(rho_theta)||_1 <= 2 epsilon.

    Joint SDP over the Choi matrix of alpha: T's space -> S's space and
    per-label Jordan decomposition variables; the shared epigraph bound
    t encodes the sup over labels, so the min-max is one program.
    """
    pairs = _match_labels(S, T)
    d_K, d_H = S.dim, T.dim
    n_A = d_K * d_H
    L = len(pairs)
    constraints: list[tuple[dict[int, np.ndarray], float]] = []

    # Blocks: 0 = A, then per label P_l, N_l, slack u_l, finally t.
    def pb(l: int) -> int:
        return 1 + 3 * l

    def nbk(l: int) -> int:
        return 2 + 3 * l

    def ub(l: int) -> int:
        return 3 + 3 * l

    tb = 1 + 3 * L
    eye_K = np.eye(d_K, dtype=complex)
    for G in _basis(d_H):
        constraints.append(({0: np.kron(eye_K, G)}, float(np.real(np.trace(G)))))
    for l, (sigma, rho) in enumerate(pairs):
        for F in _basis(d_K):
            coeff_A = linalg.hermitize(np.kron(F, rho.T))
            rhs = float(np.real(np.trace(F @ sigma)))
            constraints.append(({pb(l): F, nbk(l): -F, 0: coeff_A}, rhs))
        constraints.append(
            (
                {
                    pb(l): eye_K,
                    nbk(l): eye_K,
                    ub(l): np.ones((1, 1)),
                    tb: -np.ones((1, 1)),
                },
                0.0,
            )
        )
    problem = sdp.SdpProblem(
        blocks=(n_A,) + (d_K, d_K, 1) * L + (1,),
        objective={tb: np.ones((1, 1))},
        constraints=constraints,
        sense="minimize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="experiment deficiency SDP")
    alpha_raw = HermitianMap(d_H, d_K, sol.X[0])
    alpha, shift = maps.project_to_channel(alpha_raw)
    if shift > 1e-7:
        raise MaxIterations(
            f"randomizing channel needed a re-projection of size {shift:.2e}"
        )
    eps = max(0.0, float(sol.primal_value) / 2.0)
    return ExpDeficiencyResult(0.0 if eps < CLAMP else eps, alpha)


def classical_deficiency_lp(S: Experiment, T: Experiment) -> float:
    """Independent linear-program route for diagonal experiments.

    Requires every state of both experiments to be diagonal. Minimizes
    t with q_theta - M p_theta = e+ - e-, column-stochastic M >= 0 and
    sum(e+ + e-) <= t per label; returns epsilon = t/2. Solved with
    scipy's HiGHS backend, fully independent of the SDP path.
    """
    from scipy.optimize import linprog

    pairs = _match_labels(S, T)
    for i, (sigma, rho) in enumerate(pairs):
        for name, M in (("first", sigma), ("second", rho)):
            if float(np.abs(M - np.diag(np.diag(M))).max()) > 1e-10:
                raise ValidationError(
                    f"{name} experiment state {i} is not diagonal; LP route needs classical data"
                )
    d_K, d_H = S.dim, T.dim
    L = len(pairs)
    qs = [np.real(np.diag(sigma)) for sigma, _ in pairs]
    ps = [np.real(np.diag(rho)) for _, rho in pairs]

    # Variables: M (d_K*d_H, column-major by input j), e+ (L*d_K), e- (L*d_K), t.
    nM = d_K * d_H
    nE = L * d_K
    nvar = nM + 2 * nE + 1

    def m_idx(i: int, j: int) -> int:
        return j * d_K + i

    A_eq = []
    b_eq = []
    for l in range(L):
        for i in range(d_K):
            row = np.zeros(nvar)
            for j in range(d_H):
                row[m_idx(i, j)] = ps[l][j]
            row[nM + l * d_K + i] = 1.0
            row[nM + nE + l * d_K + i] = -1.0
            A_eq.append(row)
            b_eq.append(qs[l][i])
    for j in range(d_H):
        row = np.zeros(nvar)
        for i in range(d_K):
            row[m_idx(i, j)] = 1.0
        A_eq.append(row)
        b_eq.append(1.0)
    A_ub = []
    b_ub = []
    for l in range(L):
        row = np.zeros(nvar)
        row[nM + l * d_K : nM + (l + 1) * d_K] = 1.0
        row[nM + nE + l * d_K : nM + nE + (l + 1) * d_K] = 1.0
        row[-1] = -1.0
        A_ub.append(row)
        b_ub.append(0.0)
    c = np.zeros(nvar)
    c[-1] = 1.0
    res = linprog(
        c,
        A_ub=np.array(A_ub),
        b_ub=np.array(b_ub),
        A_eq=np.array(A_eq),
        b_eq=np.array(b_eq),
        bounds=[(0, None)] * (nvar - 1) + [(0, None)],
        method="highs",
    )
    if not res.success:
        raise ValidationError(f"classical LP failed: {res.message}")
    eps = float(res.x[-1]) / 2.0
    return 0.0 if eps < CLAMP else eps


def ensemble_criterion_gap(
    S: Experiment,
    T: Experiment,
    labels: Sequence[str],
    E: Ensemble,
    epsilon: float,
    gap_tol: float | None = None,
) -> float:
    """Block-diagonal ensemble test of the randomization criterion.

    E lives on C^n (x) K with states sum_j E_jj (x) tau^j_i. Mixing the
    blocks with sigma_theta_j (resp. rho_theta_j) gives two ensembles;
    the returned gap P_sigma - P_rho - epsilon P_succ(E) must be <= 0
    whenever epsilon is at least the experiment deficiency.
    """
    labels = [str(x) for x in labels]
    n = len(labels)
    d_K = S.dim
    if E.dim != n * d_K:
        raise ShapeError(f"ensemble dim {E.dim} != len(labels) * dim(S) = {n * d_K}")
    for i, s in enumerate(E.states):
        blocks = s.reshape(n, d_K, n, d_K)
        off = blocks.copy()
        for j in range(n):
            off[j, :, j, :] = 0.0
        if float(np.abs(off).max()) > 1e-10:
            raise ShapeError(f"ensemble state {i} is not block diagonal")
    sig = maps.cq_map([S.state_for(lbl) for lbl in labels])
    rho = maps.cq_map([T.state_for(lbl) for lbl in labels])
    mixed_S = discrimination.push_ensemble(sig, E, ancilla=d_K)
    mixed_T = discrimination.push_ensemble(rho, E, ancilla=d_K)
    p_S = discrimination.psucc(mixed_S, gap_tol=gap_tol).value
    p_T = discrimination.psucc(mixed_T, gap_tol=gap_tol).value
    p_E = discrimination.psucc(E, gap_tol=gap_tol).value
    return p_S - p_T - float(epsilon) * p_E


def is_complete(T: Experiment) -> bool:
    """True when the states span the Hermitian operators on T's space.

    Rank of the real Hilbert-Schmidt Gram matrix of the states, with
    eigenvalues counted above 1e-9 times the largest singular value.
    """
    n = len(T.states)
    G = np.empty((n, n))
    for i, a in enumerate(T.states):
        for j, b in enumerate(T.states):
            G[i, j] = float(np.real(np.trace(a @ b)))
    ev = np.linalg.eigvalsh(G)
    top = float(ev[-1])
    if top <= 0.0:
        return False
    return int((ev > 1e-9 * top).sum()) == T.dim * T.dim


def coro3_ensemble(
    Lam: np.ndarray, T0: Experiment, S0: Experiment
) -> Ensemble:
    """Equiprobable product-form ensemble sum_jl Lam^i_jl tau^H_l (x) tau^K_j.

    T0 supplies the H-side states (index l), S0 the K-side states
    (index j); both experiments must be complete and each row of Lam
    must be a probability distribution over (j, l).
    """
    L = np.asarray(Lam, dtype=float)
    if L.ndim != 3:
        raise ShapeError(f"need a rank-3 tensor, got shape {L.shape}")
    k, nj, nl = L.shape
    if nj != len(S0.states) or nl != len(T0.states):
        raise ShapeError(
            f"tensor shape {L.shape} does not match |S0| = {len(S0.states)}, |T0| = {len(T0.states)}"
        )
    if np.any(L < 0.0):
        raise ValidationError("tensor entries must be nonnegative")
    sums = L.reshape(k, -1).sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-10):
        raise ValidationError("every tensor row must sum to 1")
    if not is_complete(T0):
        raise NotComplete("first factor experiment does not span its Hermitian space")
    if not is_complete(S0):
        raise NotComplete("second factor experiment does not span its Hermitian space")
    states = []
    for i in range(k):
        s = sum(
            L[i, j, l] * np.kron(T0.states[l], S0.states[j])
            for j in range(nj)
            for l in range(nl)
        )
        states.append(s)
    return Ensemble((1.0 / k,) * k, tuple(states))


def coro2_scan(
    S: Experiment,
    T: Experiment,
    S0: Experiment,
    trials: int,
    seed: int,
    k: int | None = None,
    gap_tol: float | None = None,
) -> dict[str, Any]:
    """Randomization scan through mixtures against a complete family.

    Samples row-stochastic tensors Lam, forms the ensembles with states
    sum_jl Lam^i_jl sigma_theta_l (x) tau_j and their rho counterparts,
    and reports the worst guessing-probability gap. A randomization of
    T into S forces the gap to vanish; a positive gap found is evidence
    against randomizability, absence of one is inconclusive.
    """
    if not is_complete(S0):
        raise NotComplete("mixing experiment S0 must be complete")
    if S0.dim != S.dim:
        raise DimensionMismatch(
            f"S0 must live on S's space: {S0.dim} != {S.dim}"
        )
    _match_labels(S, T)
    d_K = S.dim
    if k is None:
        k = d_K * d_K
    nj = len(S0.states)
    nl = len(S.labels)
    g = randomgen.rng(seed)
    streams = randomgen.spawn_streams(g, trials)
    max_gap = -np.inf
    for st in streams:
        Lam = st.dirichlet(np.ones(nj * nl), size=k).reshape(k, nj, nl)
        s_states = []
        t_states = []
        for i in range(k):
            s_states.append(
                sum(
                    Lam[i, j, l] * np.kron(S.state_for(S.labels[l]), S0.states[j])
                    for j in range(nj)
                    for l in range(nl)
                )
            )
            t_states.append(
                sum(
                    Lam[i, j, l] * np.kron(T.state_for(S.labels[l]), S0.states[j])
                    for j in range(nj)
                    for l in range(nl)
                )
            )
        E_s = Ensemble((1.0 / k,) * k, tuple(s_states))
        E_t = Ensemble((1.0 / k,) * k, tuple(t_states))
        gap = (
            discrimination.psucc(E_s, gap_tol=gap_tol).value
            - discrimination.psucc(E_t, gap_tol=gap_tol).value
        )
        max_gap = max(max_gap, gap)
    return {"trials": trials, "seed": seed, "k": k, "max_gap": float(max_gap)}
