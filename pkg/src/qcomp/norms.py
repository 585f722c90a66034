"""Diamond norm and its dual for Hermiticity-preserving maps.

Both norms are computed by order-theoretic SDPs:

    ||phi||_D  = min { ||beta*(I)||_op : beta -+ phi CP }
    ||psi||^D  = min { Tr rho : rho >= 0, rho (x) I -+ C(psi) >= 0 }

so the dual program ranges over the erasure channels A -> Tr[A] sigma,
whose Choi matrices are sigma (x) I. For completely positive maps both
norms collapse to closed forms / single small programs, and for the
cq / qc families they reduce further; those reductions are exposed as
``cq_norms`` and ``qc_norms`` and used as cross-checks in the tests.

Values smaller than 1e-10 are clamped to exactly zero.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import linalg, maps, sdp
from .errors import DimensionMismatch
from .linalg import herm_basis
from .maps import HermitianMap

CLAMP = 1e-10


def _clamp(x: float) -> float:
    return 0.0 if abs(x) < CLAMP else float(x)


@lru_cache(maxsize=None)
def _basis(n: int) -> tuple[np.ndarray, ...]:
    return tuple(herm_basis(n))


def erasure_map(sigma: np.ndarray, d_in: int) -> HermitianMap:
    """The map A -> Tr[A] sigma; a channel when sigma is a state."""
    S = linalg.require_hermitian(sigma, what="erasure target")
    return HermitianMap(d_in, S.shape[0], np.kron(S, np.eye(d_in, dtype=complex)))


def diamond_norm(phi: HermitianMap, gap_tol: float | None = None) -> float:
    """Diamond norm via the epigraph SDP over dominating CP maps.

    Variables are P = B - C(phi), Q = B + C(phi) and lambda, where B is
    the Choi matrix of the dominating map; the output marginal of B is
    pinned to lambda * I on the input space.
    """
    n = phi.d_out * phi.d_in
    C = phi.choi
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    # Q - P = 2 C(phi), coordinate by coordinate in a Hermitian basis.
    for F in _basis(n):
        constraints.append(({0: -F, 1: F}, 2.0 * float(np.real(np.trace(F @ C)))))
    # Tr_out[(P + Q)/2] = lambda * I on the input space.
    eye_out = np.eye(phi.d_out, dtype=complex)
    for G in _basis(phi.d_in):
        A = np.kron(eye_out, G) / 2.0
        constraints.append(({0: A, 1: A, 2: -np.real(np.trace(G)) * np.ones((1, 1))}, 0.0))
    problem = sdp.SdpProblem(
        blocks=(n, n, 1),
        objective={2: np.ones((1, 1))},
        constraints=constraints,
        sense="minimize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="diamond norm SDP")
    return _clamp(sol.primal_value)


def dual_diamond_norm(psi: HermitianMap, gap_tol: float | None = None) -> float:
    """Dual diamond norm: least Tr[rho] with rho (x) I -+ C(psi) >= 0.

    Encoded through the attainment pair: the block side maximizes
    <C(psi), X1 - X2> over X1, X2 >= 0 with Tr_in(X1 + X2) = I, whose
    multiplier side is exactly the erasure program min Tr[rho] subject
    to rho (x) I -+ C(psi) >= 0 (rho = sum_k y_k F_k over the Hermitian
    basis). The returned value is the certified Tr[rho] side.
    """
    n = psi.d_out * psi.d_in
    C = psi.choi
    eye_in = np.eye(psi.d_in, dtype=complex)
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    for F in _basis(psi.d_out):
        A = np.kron(F, eye_in)
        constraints.append(({0: A, 1: A}, float(np.real(np.trace(F)))))
    problem = sdp.SdpProblem(
        blocks=(n, n),
        objective={0: C, 1: -C},
        constraints=constraints,
        sense="maximize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="dual diamond norm SDP")
    return _clamp(sol.dual_value)


def diamond_norm_cp(phi: HermitianMap) -> float:
    """For CP maps the diamond norm is the largest eigenvalue of phi*(I)."""
    maps.require_cp(phi)
    marg = linalg.partial_trace(phi.choi, (phi.d_out, phi.d_in), "first")
    return _clamp(float(linalg.eigvals_herm(marg)[0]))


def dual_diamond_norm_cp(phi: HermitianMap, gap_tol: float | None = None) -> float:
    """For CP maps the dual norm is the best pairing with a channel.

    Maximizes Tr[C(alpha) C(phi*)] over Choi matrices of channels
    alpha mapping the output space back to the input space.
    """
    maps.require_cp(phi)
    target = maps.adjoint(phi).choi
    n = phi.d_in * phi.d_out
    eye_in = np.eye(phi.d_in, dtype=complex)
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    for G in _basis(phi.d_out):
        constraints.append(({0: np.kron(eye_in, G)}, float(np.real(np.trace(G)))))
    problem = sdp.SdpProblem(
        blocks=(n,),
        objective={0: target},
        constraints=constraints,
        sense="maximize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="dual diamond norm (CP) SDP")
    return _clamp(sol.primal_value)


def cq_norms(ops: list[np.ndarray], gap_tol: float | None = None) -> tuple[float, float]:
    """Diamond and dual norm of the map diag(x) -> sum_i x_i A_i.

    The diamond norm is max_i ||A_i||_1 in closed form. The dual norm
    is the SDP min Tr[rho] with rho -+ A_i >= 0 for every i.
    """
    As = [linalg.require_hermitian(A, what=f"operator {i}") for i, A in enumerate(ops)]
    if not As:
        raise DimensionMismatch("need at least one operator")
    d = As[0].shape[0]
    if any(A.shape != (d, d) for A in As):
        raise DimensionMismatch("operators must share one dimension")
    diamond = _clamp(max(linalg.trace_norm(A) for A in As))

    n = len(As)
    # Attainment pair of min Tr[rho] with rho -+ A_i >= 0: the block
    # side maximizes sum_i <A_i, X_i - Y_i> over X_i, Y_i >= 0 with
    # sum_i (X_i + Y_i) = I; the multiplier side recovers rho.
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    objective: dict[int, np.ndarray] = {}
    for i, A in enumerate(As):
        objective[2 * i] = A
        objective[2 * i + 1] = -A
    for F in _basis(d):
        row = {b: F for b in range(2 * n)}
        constraints.append((row, float(np.real(np.trace(F)))))
    problem = sdp.SdpProblem(
        blocks=(d,) * (2 * n),
        objective=objective,
        constraints=constraints,
        sense="maximize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="cq dual norm SDP")
    return diamond, _clamp(sol.dual_value)


def qc_norms(ops: list[np.ndarray], gap_tol: float | None = None) -> tuple[float, float]:
    """Diamond and dual norm of the map A -> sum_k Tr[A B_k] E_kk.

    The dual norm is sum_k ||B_k||_op in closed form. The diamond norm
    is the joint SDP max sum_k Tr[F_k B_k] over -sigma <= F_k <= sigma
    with sigma a state; sigma is optimized inside the program, never by
    an outer iteration.
    """
    Bs = [linalg.require_hermitian(B, what=f"operator {k}") for k, B in enumerate(ops)]
    if not Bs:
        raise DimensionMismatch("need at least one operator")
    d = Bs[0].shape[0]
    if any(B.shape != (d, d) for B in Bs):
        raise DimensionMismatch("operators must share one dimension")
    dual = _clamp(sum(linalg.op_norm(B) for B in Bs))

    n = len(Bs)
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    objective: dict[int, np.ndarray] = {}
    # Blocks: sigma, then P_k = sigma - F_k and Q_k = sigma + F_k, so
    # F_k = (Q_k - P_k)/2 and the payoff is linear in (P_k, Q_k).
    for k, B in enumerate(Bs):
        objective[1 + 2 * k] = -B / 2.0
        objective[2 + 2 * k] = B / 2.0
        for F in _basis(d):
            constraints.append(({1 + 2 * k: F, 2 + 2 * k: F, 0: -2.0 * F}, 0.0))
    constraints.append(({0: np.eye(d, dtype=complex)}, 1.0))
    problem = sdp.SdpProblem(
        blocks=(d,) + (d,) * (2 * n),
        objective=objective,
        constraints=constraints,
        sense="maximize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="qc diamond norm SDP")
    return _clamp(sol.primal_value), dual


def witness_distance(
    phi: HermitianMap, psi: HermitianMap, gap_tol: float | None = None
) -> tuple[float, HermitianMap]:
    """||phi - psi||_D through its dual characterization, in one SDP.

    Maximizes 2 <gamma, phi - psi> over CP gamma with dual diamond norm
    at most 1, the latter encoded by rho >= 0, Tr rho <= 1 and
    rho (x) I >= C(gamma). Returns the value and the optimal gamma.
    """
    if (phi.d_in, phi.d_out) != (psi.d_in, psi.d_out):
        raise DimensionMismatch("maps must share dimensions")
    chi = phi - psi
    n = chi.d_out * chi.d_in
    target = 2.0 * maps.adjoint(chi).choi
    dims_gamma = (chi.d_in, chi.d_out)  # gamma maps K back to H
    constraints: list[tuple[dict[int, np.ndarray], float]] = []
    # Blocks: G = C(gamma), rho on H, slack s, P = rho (x) I - G.
    for F in _basis(n):
        marg = linalg.partial_trace(F, dims_gamma, "second")
        constraints.append(({3: F, 0: F, 1: -marg}, 0.0))
    constraints.append(({1: np.eye(chi.d_in, dtype=complex), 2: np.ones((1, 1))}, 1.0))
    problem = sdp.SdpProblem(
        blocks=(n, chi.d_in, 1, n),
        objective={0: target},
        constraints=constraints,
        sense="maximize",
    )
    sol = sdp.solve_checked(problem, gap_tol=gap_tol, what="diamond distance witness SDP")
    gamma = HermitianMap(chi.d_out, chi.d_in, sol.X[0])
    return _clamp(sol.primal_value), gamma
