"""Hermiticity-preserving linear maps in Choi representation.

A map phi : B(C^d_in) -> B(C^d_out) is stored by its Choi matrix

    C(phi) = sum_ij phi(E_ij) (x) E_ij

acting on C^d_out (x) C^d_in, with the first tensor factor the output
space. The correspondence is one to one between Hermiticity-preserving
maps and Hermitian Choi matrices, and it is an order isomorphism:
phi is completely positive iff C(phi) >= 0, and phi is a channel iff in
addition the partial trace of C(phi) over the output factor equals the
identity on the input space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    NotAChannel,
    NotCompletelyPositive,
    NotHermitian,
)
from .linalg import DimPair

HERM_TOL = linalg.HERM_TOL
PSD_TOL = 1e-8
CHAN_TOL = 1e-8


@dataclass(frozen=True)
class HermitianMap:
    """A Hermiticity-preserving map held as its Choi matrix.

    The Choi matrix is validated and symmetrized on construction; maps
    are immutable afterwards. Hermitian functionals and block-diagonal
    classical objects reuse this type with the appropriate dimensions.
    """

    d_in: int
    d_out: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.d_in < 1 or self.d_out < 1:
            raise DimensionMismatch(f"dimensions must be positive, got {self.d_in}, {self.d_out}")
        n = self.d_out * self.d_in
        C = linalg.as_matrix(self.choi)
        if C.shape != (n, n):
            raise DimensionMismatch(
                f"Choi matrix shape {C.shape} does not match d_out*d_in = {n}"
            )
        try:
            C = linalg.require_hermitian(C, HERM_TOL, what="Choi matrix")
        except NotHermitian:
            raise
        C.setflags(write=False)
        object.__setattr__(self, "choi", C)

    @property
    def dims(self) -> DimPair:
        return DimPair(self.d_in, self.d_out)

    def choi_tensor(self) -> np.ndarray:
        """Choi matrix reshaped to indices [out, in, out', in']."""
        return self.choi.reshape(self.d_out, self.d_in, self.d_out, self.d_in)

    def _require_same_dims(self, other: "HermitianMap") -> None:
        if (self.d_in, self.d_out) != (other.d_in, other.d_out):
            raise DimensionMismatch(
                f"maps have different dimensions: ({self.d_in}->{self.d_out}) vs "
                f"({other.d_in}->{other.d_out})"
            )

    def __add__(self, other: "HermitianMap") -> "HermitianMap":
        self._require_same_dims(other)
        return HermitianMap(self.d_in, self.d_out, self.choi + other.choi)

    def __sub__(self, other: "HermitianMap") -> "HermitianMap":
        self._require_same_dims(other)
        return HermitianMap(self.d_in, self.d_out, self.choi - other.choi)

    def __neg__(self) -> "HermitianMap":
        return HermitianMap(self.d_in, self.d_out, -self.choi)

    def __mul__(self, c: float) -> "HermitianMap":
        # Real scalars only: complex scaling would break hermiticity.
        return HermitianMap(self.d_in, self.d_out, float(c) * self.choi)

    __rmul__ = __mul__


def max_entangled_kernel(d: int) -> np.ndarray:
    """The rank-one kernel sum_ij E_ij (x) E_ij with trace d."""
    if d < 1:
        raise DimensionMismatch(f"dimension must be positive, got {d}")
    v = np.eye(d, dtype=complex).reshape(d * d)
    return np.outer(v, v.conj())


def identity_map(d: int) -> HermitianMap:
    """The identity channel on B(C^d); its Choi matrix is the kernel above."""
    return HermitianMap(d, d, max_entangled_kernel(d))


def map_from_kraus(kraus: Sequence[np.ndarray]) -> HermitianMap:
    """CP map A -> sum_k K_k A K_k^dag from a list of Kraus operators."""
    if not kraus:
        raise DimensionMismatch("need at least one Kraus operator")
    Ks = [linalg.as_matrix(K) for K in kraus]
    d_out, d_in = Ks[0].shape
    for K in Ks:
        if K.shape != (d_out, d_in):
            raise DimensionMismatch("Kraus operators must share one shape")
    C = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for K in Ks:
        v = K.reshape(d_out * d_in)
        C += np.outer(v, v.conj())
    return HermitianMap(d_in, d_out, C)


def apply(phi: HermitianMap, A: np.ndarray) -> np.ndarray:
    """Evaluate phi(A) = Tr_in[(I (x) A^T) C(phi)]."""
    M = linalg.as_matrix(A)
    if M.shape != (phi.d_in, phi.d_in):
        raise DimensionMismatch(f"argument shape {M.shape} does not match d_in={phi.d_in}")
    # C(phi)[a,i,b,j] = phi(E_ij)[a,b], so phi(A) contracts A against (i, j).
    T = phi.choi_tensor()
    return np.einsum("aibj,ij->ab", T, M)


def compose(psi: HermitianMap, phi: HermitianMap) -> HermitianMap:
    """The composition psi o phi (apply phi first)."""
    if psi.d_in != phi.d_out:
        raise DimensionMismatch(
            f"cannot compose: psi expects input dim {psi.d_in}, phi outputs {phi.d_out}"
        )
    P = psi.choi_tensor()
    Q = phi.choi_tensor()
    # C(psi o phi)[m,i,n,j] = sum_ab C(psi)[m,a,n,b] C(phi)[a,i,b,j]
    R = np.einsum("manb,aibj->minj", P, Q)
    n = psi.d_out * phi.d_in
    return HermitianMap(phi.d_in, psi.d_out, R.reshape(n, n))


def adjoint(phi: HermitianMap) -> HermitianMap:
    """The adjoint map phi* with Tr[phi(A)^dag B] = Tr[A^dag phi*(B)]."""
    T = phi.choi_tensor()
    # C(phi*)[i,a,j,b] = conj(C(phi)[a,i,b,j]); for Hermitian Choi this
    # is the [j,b,i,a] entry.
    R = T.transpose(1, 0, 3, 2).conj()
    n = phi.d_in * phi.d_out
    return HermitianMap(phi.d_out, phi.d_in, R.reshape(n, n))


def tensor(phi: HermitianMap, psi: HermitianMap) -> HermitianMap:
    """The tensor product map phi (x) psi."""
    T1 = phi.choi_tensor()
    T2 = psi.choi_tensor()
    R = np.einsum("aibj,ckdl->acikbdjl", T1, T2)
    d_in = phi.d_in * psi.d_in
    d_out = phi.d_out * psi.d_out
    return HermitianMap(d_in, d_out, R.reshape(d_out * d_in, d_out * d_in))


def cq_map(ops: Sequence[np.ndarray]) -> HermitianMap:
    """Map diag inputs to operators: phi(X) = sum_i X_ii A_i.

    Input space is C^n with n = len(ops); the Choi matrix is
    sum_i A_i (x) E_ii. The map is Hermiticity preserving iff every
    A_i is Hermitian, CP iff every A_i >= 0, and a channel iff every
    A_i is a state.
    """
    if not ops:
        raise DimensionMismatch("need at least one operator")
    As = [linalg.require_hermitian(A, what=f"operator {i}") for i, A in enumerate(ops)]
    d = As[0].shape[0]
    for A in As:
        if A.shape != (d, d):
            raise DimensionMismatch("operators must share one dimension")
    n = len(As)
    C = np.zeros((d * n, d * n), dtype=complex)
    for i, A in enumerate(As):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1.0
        C += np.kron(A, E)
    return HermitianMap(n, d, C)


def qc_map(ops: Sequence[np.ndarray]) -> HermitianMap:
    """Measure-and-record map: phi(A) = sum_k Tr[A B_k] E_kk.

    Output space is C^n with n = len(ops); the Choi matrix is
    sum_k E_kk (x) B_k^T. CP iff every B_k >= 0; a channel iff the
    B_k form a POVM (sum to the identity).
    """
    if not ops:
        raise DimensionMismatch("need at least one operator")
    Bs = [linalg.require_hermitian(B, what=f"operator {k}") for k, B in enumerate(ops)]
    d = Bs[0].shape[0]
    for B in Bs:
        if B.shape != (d, d):
            raise DimensionMismatch("operators must share one dimension")
    n = len(Bs)
    C = np.zeros((n * d, n * d), dtype=complex)
    for k, B in enumerate(Bs):
        E = np.zeros((n, n), dtype=complex)
        E[k, k] = 1.0
        C += np.kron(E, B.T)
    return HermitianMap(d, n, C)


def pinching(d: int) -> HermitianMap:
    """The channel that zeroes all off-diagonal entries in the standard basis."""
    C = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[i, i] = 1.0
        C += np.kron(E, E)
    return HermitianMap(d, d, C)


def s_functional(phi: HermitianMap) -> float:
    """The tracelike functional s(phi) = sum_ij <e_i, phi(E_ij) e_j>.

    Equals Tr[C(phi) K] with K the maximally entangled kernel, requires
    d_in == d_out, and satisfies s(psi o phi) = s(phi o psi).
    """
    if phi.d_in != phi.d_out:
        raise DimensionMismatch("s functional needs d_in == d_out")
    T = phi.choi_tensor()
    return float(np.real(np.einsum("iijj->", T)))


def pairing(psi: HermitianMap, phi: HermitianMap) -> float:
    """Bilinear pairing <psi, phi> = s(psi o phi) = Tr[C(phi) C(psi*)]."""
    if psi.d_in != phi.d_out or psi.d_out != phi.d_in:
        raise DimensionMismatch(
            f"pairing needs opposite dims, got ({psi.d_in}->{psi.d_out}) and "
            f"({phi.d_in}->{phi.d_out})"
        )
    return float(np.real(np.trace(phi.choi @ adjoint(psi).choi)))


def is_cp(phi: HermitianMap, tol: float = PSD_TOL) -> bool:
    """Complete positivity test: smallest Choi eigenvalue >= -tol."""
    return linalg.min_eig(phi.choi, tol=np.inf) >= -tol


def is_channel(phi: HermitianMap, tol: float = CHAN_TOL) -> bool:
    """CP plus trace preservation: Tr_out C(phi) = I within tol."""
    if not is_cp(phi, tol):
        return False
    marginal = linalg.partial_trace(phi.choi, (phi.d_out, phi.d_in), "first")
    return float(np.abs(marginal - np.eye(phi.d_in)).max()) <= tol


def require_cp(phi: HermitianMap, tol: float = PSD_TOL) -> HermitianMap:
    """Raise NotCompletelyPositive unless phi is CP."""
    if not is_cp(phi, tol):
        raise NotCompletelyPositive(
            f"smallest Choi eigenvalue {linalg.min_eig(phi.choi, tol=np.inf):.3e} < -{tol:.1e}"
        )
    return phi


def require_channel(phi: HermitianMap, tol: float = CHAN_TOL) -> HermitianMap:
    """Raise NotAChannel unless phi is a channel."""
    if not is_channel(phi, tol):
        raise NotAChannel("map is not trace preserving and completely positive within tol")
    return phi


def project_to_channel(phi: HermitianMap) -> tuple[HermitianMap, float]:
    """Nearest-channel cleanup for a numerically perturbed Choi matrix.

    Clips negative eigenvalues to zero and rescales so the output
    partial trace is exactly the identity. Returns the repaired channel
    and the operator-norm size of the shift that was applied.
    """
    w, V = linalg.herm_eig(phi.choi)
    w_clip = np.clip(w, 0.0, None)
    C = (V * w_clip) @ V.conj().T
    marginal = linalg.partial_trace(C, (phi.d_out, phi.d_in), "first")
    mw, mV = linalg.herm_eig(marginal)
    if mw[-1] <= 0.0:
        raise NotAChannel("output marginal is singular, cannot rescale to a channel")
    inv_sqrt = (mV * (1.0 / np.sqrt(mw))) @ mV.conj().T
    F = np.kron(np.eye(phi.d_out, dtype=complex), inv_sqrt)
    C2 = F @ C @ F.conj().T
    shift = linalg.op_norm(C2 - phi.choi)
    return HermitianMap(phi.d_in, phi.d_out, C2), float(shift)
