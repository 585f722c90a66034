"""Ensembles, POVMs and optimal state discrimination.

The guessing probability P_succ of an ensemble is computed by the
standard discrimination SDP. Its link to the dual diamond norm runs
through the cq map of the ensemble: P_succ(E) equals the dual diamond
norm of phi_E, the map sending diag weights to the weighted states.
The canonical ensemble of a CP map gamma conjugates the Choi matrix of
gamma by clock-shift (discrete Weyl) unitaries on the input factor;
its guessing probability recovers the dual diamond norm of gamma up to
the normalization d_K * Tr[gamma(I)].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg, maps, norms, sdp
from .errors import DimensionMismatch, ValidationError, ZeroMap
from .maps import HermitianMap

WEIGHT_TOL = 1e-10
STATE_TOL = 1e-8
EIG_CLIP = 1e-10


def _clean_state(M: np.ndarray, tol: float = STATE_TOL, what: str = "state") -> np.ndarray:
    """Validate a density matrix, absorbing rounding at the -1e-10 level."""
    A = linalg.require_hermitian(M, what=what)
    w, V = np.linalg.eigh(A)
    if w[0] < -tol:
        raise ValidationError(f"{what} has negative eigenvalue {w[0]:.3e}")
    w = np.where(w < 0.0, np.where(w >= -EIG_CLIP, 0.0, w), w)
    A = (V * w) @ V.conj().T
    tr = float(np.real(np.trace(A)))
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"{what} has trace {tr:.12f}, expected 1")
    A = linalg.hermitize(A)
    A.setflags(write=False)
    return A


@dataclass(frozen=True)
class Ensemble:
    """Finite ensemble of quantum states with strictly positive weights."""

    weights: tuple[float, ...]
    states: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if not self.weights or len(self.weights) != len(self.states):
            raise DimensionMismatch("weights and states must align and be nonempty")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0.0) or np.any(w > 1.0):
            raise ValidationError("weights must lie in (0, 1]")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights sum to {w.sum():.15f}, expected 1")
        d = linalg.as_matrix(self.states[0]).shape[0]
        cleaned = []
        for i, s in enumerate(self.states):
            S = _clean_state(s, what=f"state {i}")
            if S.shape != (d, d):
                raise DimensionMismatch("ensemble states must share one dimension")
            cleaned.append(S)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "states", tuple(cleaned))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def items(self) -> tuple[tuple[float, np.ndarray], ...]:
        return tuple(zip(self.weights, self.states))

    @classmethod
    def from_items(cls, items: Sequence[tuple[float, np.ndarray]]) -> "Ensemble":
        ws, ss = zip(*items)
        return cls(tuple(float(w) for w in ws), tuple(ss))


@dataclass(frozen=True)
class Povm:
    """Positive operator valued measure: PSD elements summing to I."""

    elements: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if not self.elements:
            raise DimensionMismatch("POVM needs at least one element")
        d = linalg.as_matrix(self.elements[0]).shape[0]
        cleaned = []
        total = np.zeros((d, d), dtype=complex)
        for i, M in enumerate(self.elements):
            A = linalg.require_hermitian(M, what=f"POVM element {i}")
            if A.shape != (d, d):
                raise DimensionMismatch("POVM elements must share one dimension")
            if linalg.min_eig(A, tol=np.inf) < -STATE_TOL:
                raise ValidationError(f"POVM element {i} is not PSD within tolerance")
            A.setflags(write=False)
            cleaned.append(A)
            total += A
        if float(np.abs(total - np.eye(d)).max()) > STATE_TOL:
            raise ValidationError("POVM elements do not sum to the identity within tolerance")
        object.__setattr__(self, "elements", tuple(cleaned))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.elements)


class PsuccResult(NamedTuple):
    value: float
    povm: Povm


class DualNormCheck(NamedTuple):
    lhs: float
    rhs: float
    diff: float


@lru_cache(maxsize=None)
def _basis(n: int) -> tuple[np.ndarray, ...]:
    return tuple(linalg.herm_basis(n))


def _repair_povm(blocks: Sequence[np.ndarray]) -> Povm:
    """Clip tiny negatives and renormalize so the elements sum to I."""
    d = blocks[0].shape[0]
    clipped = []
    for M in blocks:
        w, V = np.linalg.eigh(linalg.hermitize(M))
        clipped.append((V * np.clip(w, 0.0, None)) @ V.conj().T)
    S = linalg.hermitize(sum(clipped) + 1e-14 * np.eye(d))
    w, V = np.linalg.eigh(S)
    inv_sqrt = (V * (1.0 / np.sqrt(np.clip(w, 1e-14, None)))) @ V.conj().T
    return Povm(tuple(linalg.hermitize(inv_sqrt @ M @ inv_sqrt) for M in clipped))


def psucc(E: Ensemble, gap_tol: float | None = None) -> PsuccResult:
    """Optimal guessing probability and an optimal POVM.

    SDP: maximize sum_i Tr[M_i (w_i s_i)] over POVMs (M_i); the dual
    searches for the least Y dominating every weighted state.
    """
    d = E.dim
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    for F in _basis(d):
        constraints.append(
            ({i: F for i in range(E.n)}, float(np.real(np.trace(F))))
        )
    objective = {i: E.weights[i] * E.states[i] for i in range(E.n)}
    problem = sdp.SdpProblem(
        blocks=(d,) * E.n,
        objective=objective,
        constraints=constraints,
        sense="maximize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="guessing probability SDP")
    return PsuccResult(float(sol.primal_value), _repair_povm(sol.X))


def cq_of_ensemble(E: Ensemble) -> HermitianMap:
    """The cq map phi_E built from the weighted states w_i s_i."""
    return maps.cq_map([w * s for w, s in E.items])


def psucc_equals_dual_norm_check(E: Ensemble) -> DualNormCheck:
    """Compare P_succ(E) with the dual diamond norm of phi_E."""
    lhs = psucc(E).value
    rhs = norms.dual_diamond_norm(cq_of_ensemble(E))
    return DualNormCheck(lhs, rhs, lhs - rhs)


def heisenberg_weyl(d: int) -> list[np.ndarray]:
    """Clock-shift unitaries U_(a,b) = S^a C^b, indexed i = a*d + b.

    S is the cyclic shift, C = diag(omega^k) with omega = exp(2 pi i/d).
    The family satisfies the twirl identity
    (1/d) sum_j U_j^dag A U_j = Tr[A] I.
    """
    if d < 1:
        raise DimensionMismatch(f"dimension must be positive, got {d}")
    omega = np.exp(2j * np.pi / d)
    S = np.zeros((d, d), dtype=complex)
    for k in range(d):
        S[(k + 1) % d, k] = 1.0
    C = np.diag(omega ** np.arange(d))
    out = []
    for a in range(d):
        Sa = np.linalg.matrix_power(S, a)
        for b in range(d):
            out.append(Sa @ np.linalg.matrix_power(C, b))
    return out


def ensemble_from_cp_map(gamma: HermitianMap) -> Ensemble:
    """Equiprobable ensemble conjugating C(gamma) by I (x) U_i.

    For gamma: K -> H the states live on H (x) K and are
    sigma_i = (I (x) U_i^dag) C(gamma) (I (x) U_i) / Tr[gamma(I)].
    """
    maps.require_cp(gamma)
    t = float(np.real(np.trace(gamma.choi)))
    if t <= 1e-12:
        raise ZeroMap("cannot build an ensemble from a (numerically) zero map")
    d_K = gamma.d_in
    eye_H = np.eye(gamma.d_out, dtype=complex)
    states = []
    for U in heisenberg_weyl(d_K):
        W = np.kron(eye_H, U)
        states.append(W.conj().T @ gamma.choi @ W / t)
    n = d_K * d_K
    return Ensemble((1.0 / n,) * n, tuple(states))


def dual_norm_from_guessing(gamma: HermitianMap, gap_tol: float | None = None) -> float:
    """Dual diamond norm of a CP map via its canonical ensemble."""
    t = float(np.real(np.trace(gamma.choi)))
    E = ensemble_from_cp_map(gamma)
    return gamma.d_in * t * psucc(E, gap_tol=gap_tol).value


def push_ensemble(phi: HermitianMap, E: Ensemble, ancilla: int = 1) -> Ensemble:
    """Apply phi (x) id_ancilla to every state; weights are unchanged."""
    maps.require_channel(phi)
    if ancilla < 1:
        raise DimensionMismatch(f"ancilla dimension must be >= 1, got {ancilla}")
    if E.dim != phi.d_in * ancilla:
        raise DimensionMismatch(
            f"ensemble dim {E.dim} does not match d_in*ancilla = {phi.d_in * ancilla}"
        )
    big = maps.tensor(phi, maps.identity_map(ancilla)) if ancilla > 1 else phi
    states = [maps.apply(big, s) for s in E.states]
    return Ensemble(E.weights, tuple(states))


def helstrom_binary(E: Ensemble) -> float:
    """Two-state closed form (1 + ||w0 s0 - w1 s1||_1)/2.

    Standard background fact, used in tests as an oracle for the SDP.
    """
    if E.n != 2:
        raise DimensionMismatch("Helstrom closed form needs exactly two states")
    (w0, s0), (w1, s1) = E.items
    return 0.5 * (1.0 + linalg.trace_norm(w0 * s0 - w1 * s1))
