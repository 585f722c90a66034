"""Block-diagonal semidefinite programming layer.

Problems are stated in the standard primal form

    maximize   sum_b <C_b, X_b>
    subject to sum_b <A_kb, X_b> = r_k   (k = 1..m)
               X_b >= 0                  (one PSD block per b)

with Hermitian coefficient matrices and <.,.> the trace inner product.
``sense="minimize"`` flips the objective sign internally. The dual is

    minimize   r' y
    subject to sum_k y_k A_kb - C_b >= 0 for every block b.

The cone iteration itself is delegated to cvxopt's ``conelp``, a
Nesterov-Todd scaled Mehrotra predictor-corrector method. Everything
around it is owned here: presolve (consistency check and removal of
linearly dependent constraint rows), the real embedding of complex
Hermitian blocks, extraction of the complex solution, and from-scratch
certification. Residuals reported in ``SdpSolution`` are always
recomputed from the returned (X, y) pair, never copied from solver
internals, and the status is decided by those recomputed residuals.

Complex blocks are embedded via H -> [[Re H, -Im H], [Im H, Re H]].
The embedding doubles trace inner products, so embedded coefficients
carry a factor 1/2; solutions are mapped back by averaging the two
real diagonal sub-blocks and antisymmetrizing the off-diagonal ones,
which preserves all constraint values and positivity.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    Infeasible,
    MaxIterations,
    NumericalFailure,
    SolverError,
    Unbounded,
)

GAP_TOL = 1e-8
FEAS_TOL = 1e-8
MAX_ITER = 200
TOL_ENV_VAR = "QCOMP_SDP_TOL"

_RANK_TOL = 1e-12


def default_gap_tol() -> float:
    """Resolve the gap tolerance, honoring the QCOMP_SDP_TOL env var."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None:
        return GAP_TOL
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"{TOL_ENV_VAR} must be a float, got {raw!r}") from exc
    if not (0.0 < value < 1.0):
        raise ValueError(f"{TOL_ENV_VAR} must lie in (0, 1), got {value}")
    return value


@dataclass(frozen=True)
class SdpProblem:
    """Immutable problem data in block primal form.

    ``objective`` and each constraint's coefficient map are mappings
    from block index to a Hermitian matrix; absent blocks mean zero.
    """

    blocks: tuple[int, ...]
    objective: Mapping[int, np.ndarray]
    constraints: Sequence[tuple[Mapping[int, np.ndarray], float]]
    sense: str = "maximize"
    _obj: tuple[np.ndarray, ...] = field(init=False, repr=False)
    _rows: tuple[tuple[tuple[tuple[int, np.ndarray], ...], float], ...] = field(
        init=False, repr=False
    )

    def __post_init__(self) -> None:
        if self.sense not in ("maximize", "minimize"):
            raise ValueError(f"sense must be 'maximize' or 'minimize', got {self.sense!r}")
        if not self.blocks or any(n < 1 for n in self.blocks):
            raise DimensionMismatch(f"block sizes must be positive, got {self.blocks}")
        nb = len(self.blocks)

        def check(b: int, M: np.ndarray, what: str) -> np.ndarray:
            if not 0 <= b < nb:
                raise DimensionMismatch(f"{what}: block index {b} out of range")
            H = linalg.require_hermitian(M, what=what)
            if H.shape != (self.blocks[b], self.blocks[b]):
                raise DimensionMismatch(
                    f"{what}: shape {H.shape} does not match block size {self.blocks[b]}"
                )
            return H

        obj = [np.zeros((n, n), dtype=complex) for n in self.blocks]
        for b, M in dict(self.objective).items():
            obj[int(b)] = check(int(b), M, f"objective block {b}")
        rows = []
        for k, (coeffs, r) in enumerate(self.constraints):
            row = tuple(
                (int(b), check(int(b), M, f"constraint {k}, block {b}"))
            for b, M in dict(coeffs).items())
            rows.append((row, float(r)))
        object.__setattr__(self, "_obj", tuple(obj))
        object.__setattr__(self, "_rows", tuple(rows))

    @property
    def m(self) -> int:
        return len(self._rows)

    def rhs(self) -> np.ndarray:
        return np.array([r for _, r in self._rows], dtype=float)

    def constraint_value(self, k: int, X: Sequence[np.ndarray]) -> float:
        row, _ = self._rows[k]
        return float(sum(np.real(np.trace(M @ X[b])) for b, M in row))

    def objective_value(self, X: Sequence[np.ndarray]) -> float:
        return float(sum(np.real(np.trace(C @ X[b])) for b, C in enumerate(self._obj)))

    def dual_slacks(self, y: np.ndarray) -> list[np.ndarray]:
        """S_b = sum_k y_k A_kb - C_b for maximize, C_b - sum_k y_k A_kb otherwise."""
        S = [-C.copy() for C in self._obj]
        for k, (row, _) in enumerate(self._rows):
            for b, M in row:
                S[b] += y[k] * M
        if self.sense == "minimize":
            S = [-Sb for Sb in S]
        return S


@dataclass(frozen=True)
class SdpSolution:
    """Solver output plus independently recomputed residuals."""

    primal_value: float
    dual_value: float
    X: tuple[np.ndarray, ...]
    y: np.ndarray
    status: str
    iterations: int
    residuals: dict[str, float]


_cert_log: contextvars.ContextVar[list[dict[str, Any]] | None] = contextvars.ContextVar(
    "qcomp_sdp_cert_log", default=None
)


@contextlib.contextmanager
def certification_log() -> Iterator[list[dict[str, Any]]]:
    """Collect one certification record per solve inside the block."""
    records: list[dict[str, Any]] = []
    token = _cert_log.set(records)
    try:
        yield records
    finally:
        _cert_log.reset(token)


def summarize_certificates(records: Sequence[Mapping[str, Any]]) -> dict[str, Any]:
    """Worst-case residuals over a list of certification records."""
    if not records:
        return {"solves": 0}
    return {
        "solves": len(records),
        "statuses": sorted({str(rec["status"]) for rec in records}),
        "max_primal_infeas": max(float(rec["primal_infeas"]) for rec in records),
        "max_dual_infeas": max(float(rec["dual_infeas"]) for rec in records),
        "max_rel_gap": max(float(rec["rel_gap"]) for rec in records),
    }


def _embed(H: np.ndarray) -> np.ndarray:
    """Real symmetric image of a Hermitian matrix, scaled to keep traces."""
    Re, Im = H.real, H.imag
    return 0.5 * np.block([[Re, -Im], [Im, Re]])


def _vec(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=float).flatten(order="F")


def _extract_block(Z: np.ndarray, n: int, embedded: bool) -> np.ndarray:
    if not embedded:
        return linalg.hermitize(Z.astype(complex))
    P = Z[:n, :n]
    R = Z[n:, n:]
    Q = Z[n:, :n]
    Qt = Z[:n, n:]
    X = (P + R) / 2.0 + 1j * (Q - Qt) / 2.0
    return linalg.hermitize(X)


def residuals(problem: SdpProblem, X: Sequence[np.ndarray], y: np.ndarray) -> dict[str, float]:
    """Recompute feasibility and gap measures from scratch."""
    r = problem.rhs()
    eq = 0.0
    for k in range(problem.m):
        eq = max(eq, abs(problem.constraint_value(k, X) - r[k]) / (1.0 + abs(r[k])))
    cone = 0.0
    for Xb in X:
        cone = max(cone, max(0.0, -linalg.min_eig(linalg.hermitize(Xb), tol=np.inf)))
    dual_cone = 0.0
    for Sb in problem.dual_slacks(y):
        dual_cone = max(dual_cone, max(0.0, -linalg.min_eig(linalg.hermitize(Sb), tol=np.inf)))
    primal = problem.objective_value(X)
    dual = float(np.dot(y, r))
    gap = abs(primal - dual) / max(1.0, abs(primal))
    return {
        "primal_infeas": max(eq, cone),
        "dual_infeas": dual_cone,
        "rel_gap": gap,
        "primal_value": primal,
        "dual_value": dual,
    }


def _conelp_data(problem: SdpProblem) -> tuple[Any, Any, Any, dict[str, Any], list[bool]]:
    """Assemble conelp inputs for the dual-side formulation."""
    from cvxopt import matrix

    embedded = [bool(np.abs(C.imag).max() > 0.0) for C in problem._obj]
    for row, _ in problem._rows:
        for b, M in row:
            if np.abs(M.imag).max() > 0.0:
                embedded[b] = True
    sizes = [2 * n if emb else n for n, emb in zip(problem.blocks, embedded)]
    total = sum(n * n for n in sizes)
    offsets = np.cumsum([0] + [n * n for n in sizes])

    sign = 1.0 if problem.sense == "maximize" else -1.0

    h = np.zeros(total)
    for b, C in enumerate(problem._obj):
        Ce = _embed(sign * C) if embedded[b] else (sign * C).real
        h[offsets[b] : offsets[b + 1]] = -_vec(Ce)

    m = problem.m
    G = np.zeros((total, m))
    for k, (row, _) in enumerate(problem._rows):
        for b, M in row:
            Me = _embed(M) if embedded[b] else M.real
            G[offsets[b] : offsets[b + 1], k] = -_vec(Me)

    c = matrix(problem.rhs())
    dims = {"l": 0, "q": [], "s": sizes}
    return c, matrix(G), matrix(h), dims, embedded


def _presolve(problem: SdpProblem) -> tuple[list[int], bool]:
    """Return kept constraint indices and whether the system is consistent."""
    m = problem.m
    if m == 0:
        return [], True
    cols = sum(2 * n * n for n in problem.blocks)
    R = np.zeros((m, cols))
    for k, (row, _) in enumerate(problem._rows):
        parts = []
        for b, n in enumerate(problem.blocks):
            M = np.zeros((n, n), dtype=complex)
            for bb, A in row:
                if bb == b:
                    M = M + A
            parts.append(M.real.ravel())
            parts.append(M.imag.ravel())
        R[k] = np.concatenate(parts)
    r = problem.rhs()
    sv = np.linalg.svd(R, compute_uv=False)
    cut = (sv[0] if sv.size else 0.0) * _RANK_TOL
    rank = int((sv > cut).sum())
    if rank == m:
        return list(range(m)), True
    aug = np.concatenate([R, r[:, None]], axis=1)
    sv_aug = np.linalg.svd(aug, compute_uv=False)
    cut_aug = max(cut, (sv_aug[0] if sv_aug.size else 0.0) * _RANK_TOL)
    rank_aug = int((sv_aug > cut_aug).sum())
    if rank_aug > rank:
        return [], False
    import scipy.linalg

    _, _, piv = scipy.linalg.qr(R.T, mode="economic", pivoting=True)
    keep = sorted(piv[:rank].tolist())
    return keep, True


def _failed_solution(problem: SdpProblem, status: str) -> SdpSolution:
    X = tuple(np.zeros((n, n), dtype=complex) for n in problem.blocks)
    y = np.zeros(problem.m)
    nan = float("nan")
    return SdpSolution(
        primal_value=nan,
        dual_value=nan,
        X=X,
        y=y,
        status=status,
        iterations=0,
        residuals={"primal_infeas": nan, "dual_infeas": nan, "rel_gap": nan},
    )


def _record(sol: SdpSolution, problem: SdpProblem, wall: float) -> SdpSolution:
    log = _cert_log.get()
    if log is not None:
        log.append(
            {
                "status": sol.status,
                "blocks": list(problem.blocks),
                "m": problem.m,
                "iterations": sol.iterations,
                "primal_infeas": sol.residuals.get("primal_infeas", float("nan")),
                "dual_infeas": sol.residuals.get("dual_infeas", float("nan")),
                "rel_gap": sol.residuals.get("rel_gap", float("nan")),
                "wall_time": wall,
            }
        )
    return sol


def solve(
    problem: SdpProblem,
    gap_tol: float | None = None,
    feas_tol: float = FEAS_TOL,
    max_iter: int = MAX_ITER,
) -> SdpSolution:
    """Solve the problem and certify the result by recomputed residuals.

    Status is ``optimal`` only when the recomputed residuals meet
    ``feas_tol`` and the relative duality gap meets ``gap_tol``.
    ``max_iter`` status returns the best iterate found. Detected
    infeasibility or unboundedness is reported in the status field.
    """
    from cvxopt import solvers

    t0 = time.perf_counter()
    if gap_tol is None:
        gap_tol = default_gap_tol()

    keep, consistent = _presolve(problem)
    if not consistent:
        return _record(_failed_solution(problem, "infeasible"), problem, time.perf_counter() - t0)
    reduced = problem
    if len(keep) < problem.m:
        reduced = SdpProblem(
            blocks=problem.blocks,
            objective={b: C for b, C in enumerate(problem._obj)},
            constraints=[
                ({b: M for b, M in problem._rows[k][0]}, problem._rows[k][1]) for k in keep
            ],
            sense=problem.sense,
        )

    if reduced.m == 0:
        # No constraints: optimum is 0 at X = 0 iff the objective direction
        # is cone-negative, otherwise the problem is unbounded.
        sign = 1.0 if problem.sense == "maximize" else -1.0
        worst = max(linalg.eigvals_herm(sign * C)[0] for C in problem._obj)
        if worst > feas_tol:
            return _record(
                _failed_solution(problem, "unbounded"), problem, time.perf_counter() - t0
            )
        X = tuple(np.zeros((n, n), dtype=complex) for n in problem.blocks)
        y = np.zeros(problem.m)
        res = residuals(problem, X, y)
        sol = SdpSolution(res["primal_value"], res["dual_value"], X, y, "optimal", 0, res)
        return _record(sol, problem, time.perf_counter() - t0)

    c, G, h, dims, embedded = _conelp_data(reduced)

    # Tolerance ladder: ask for more precision than requested first, then
    # relax. Pushing conelp too far can end in a numerical breakdown whose
    # final iterate is useless, so every returned iterate is re-certified
    # below against the *requested* tolerances and rejected if it fails.
    common = {"show_progress": False, "maxiters": int(max_iter)}
    tight = {
        "abstol": max(3e-10, gap_tol * 3e-2),
        "reltol": max(3e-10, gap_tol * 3e-2),
        "feastol": max(1e-9, feas_tol * 0.1),
    }
    moderate = {
        "abstol": gap_tol * 0.3,
        "reltol": gap_tol * 0.3,
        "feastol": feas_tol * 0.5,
    }
    loose = {"abstol": 1e-8, "reltol": 1e-7, "feastol": 1e-8}
    attempts: list[dict[str, Any]] = [
        {"options": {**common, **tight}},
        {"options": {**common, **moderate}},
        {"options": {**common, **moderate, "kktreg": 1e-9}, "kktsolver": "ldl"},
        {"options": {**common, **loose}},
    ]

    best: SdpSolution | None = None
    best_score = math.inf
    raw_status = None
    for attempt in attempts:
        try:
            raw = solvers.conelp(c, G, h, dims=dims, **attempt)
        except (ValueError, ArithmeticError, ZeroDivisionError):
            continue
        raw_status = raw["status"]
        if raw_status == "primal infeasible":
            return _record(
                _failed_solution(problem, "unbounded"), problem, time.perf_counter() - t0
            )
        if raw_status == "dual infeasible":
            return _record(
                _failed_solution(problem, "infeasible"), problem, time.perf_counter() - t0
            )
        if raw["z"] is None or raw["x"] is None:
            continue
        Z = np.array(raw["z"]).ravel()
        sizes = dims["s"]
        offsets = np.cumsum([0] + [n * n for n in sizes])
        X = []
        for b, n in enumerate(problem.blocks):
            Zb = Z[offsets[b] : offsets[b + 1]].reshape(sizes[b], sizes[b], order="F")
            Zb = (Zb + Zb.T) / 2.0
            X.append(_extract_block(Zb, n, embedded[b]))
        y_red = np.array(raw["x"]).ravel()
        if problem.sense == "minimize":
            y_red = -y_red
        y = np.zeros(problem.m)
        for pos, k in enumerate(keep):
            y[k] = y_red[pos]
        res = residuals(problem, X, y)
        ok = (
            res["primal_infeas"] <= feas_tol
            and res["dual_infeas"] <= feas_tol
            and res["rel_gap"] <= gap_tol
        )
        score = max(res["primal_infeas"], res["dual_infeas"], res["rel_gap"])
        sol = SdpSolution(
            primal_value=res["primal_value"],
            dual_value=res["dual_value"],
            X=tuple(X),
            y=y,
            status="optimal" if ok else "max_iter",
            iterations=int(raw.get("iterations", 0)),
            residuals={k: res[k] for k in ("primal_infeas", "dual_infeas", "rel_gap")},
        )
        if ok:
            return _record(sol, problem, time.perf_counter() - t0)
        if score < best_score:
            best, best_score = sol, score

    if best is not None:
        return _record(best, problem, time.perf_counter() - t0)
    raise NumericalFailure(
        f"cone iteration failed on all attempts (last raw status: {raw_status!r})"
    )


def ensure_optimal(sol: SdpSolution, what: str = "SDP") -> SdpSolution:
    """Map non-optimal statuses to the corresponding exceptions."""
    if sol.status == "optimal":
        return sol
    if sol.status == "infeasible":
        raise Infeasible(f"{what}: problem is infeasible")
    if sol.status == "unbounded":
        raise Unbounded(f"{what}: problem is unbounded")
    if sol.status == "max_iter":
        raise MaxIterations(
            f"{what}: no certified optimum within iteration budget "
            f"(residuals {sol.residuals})"
        )
    raise SolverError(f"{what}: unexpected status {sol.status!r}")


def solve_checked(
    problem: SdpProblem,
    gap_tol: float | None = None,
    feas_tol: float = FEAS_TOL,
    max_iter: int = MAX_ITER,
    what: str = "SDP",
) -> SdpSolution:
    """solve() followed by ensure_optimal()."""
    return ensure_optimal(solve(problem, gap_tol, feas_tol, max_iter), what=what)
