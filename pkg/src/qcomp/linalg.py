"""Dense complex linear algebra helpers used by every other module.

All matrices are numpy arrays with dtype complex128. Operators on a
bipartite space H_A (x) H_B are stored with the row index flattened as
a * dim_B + b, i.e. numpy's kron convention.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np

from .errors import DimensionMismatch, NotHermitian

HERM_TOL = 1e-9
PSD_TOL = 1e-8


class DimPair(NamedTuple):
    """Input and output dimensions of a linear map."""

    d_in: int
    d_out: int


def as_matrix(M: np.ndarray) -> np.ndarray:
    """Coerce to a 2-d complex128 array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={A.ndim}")
    return A


def is_hermitian(M: np.ndarray, tol: float = HERM_TOL) -> bool:
    """True when max|M - M^dag| <= tol * max(1, max|M|)."""
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        return False
    scale = max(1.0, float(np.abs(A).max()) if A.size else 0.0)
    return float(np.abs(A - A.conj().T).max()) <= tol * scale


def hermitize(M: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (M + M^dag) / 2."""
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"cannot hermitize non-square shape {A.shape}")
    return (A + A.conj().T) / 2.0


def require_hermitian(M: np.ndarray, tol: float = HERM_TOL, what: str = "matrix") -> np.ndarray:
    """Validate hermiticity within tol and return the symmetrized matrix."""
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise NotHermitian(f"{what} is not square: shape {A.shape}")
    scale = max(1.0, float(np.abs(A).max()) if A.size else 0.0)
    dev = float(np.abs(A - A.conj().T).max()) if A.size else 0.0
    if dev > tol * scale:
        raise NotHermitian(f"{what} deviates from Hermitian by {dev:.3e} (tol {tol:.1e})")
    return hermitize(A)


def herm_eig(M: np.ndarray, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching orthonormal eigenvector columns."""
    A = require_hermitian(M, tol)
    w, V = np.linalg.eigh(A)
    return w[::-1].copy(), V[:, ::-1].copy()


def eigvals_herm(M: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Eigenvalues only, descending."""
    A = require_hermitian(M, tol)
    return np.linalg.eigvalsh(A)[::-1].copy()


def min_eig(M: np.ndarray, tol: float = HERM_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(eigvals_herm(M, tol)[-1])


def is_psd(M: np.ndarray, tol: float = PSD_TOL) -> bool:
    """True when M is Hermitian and its smallest eigenvalue is >= -tol."""
    if not is_hermitian(M, max(tol, HERM_TOL)):
        return False
    return min_eig(hermitize(M), tol=np.inf) >= -tol


def trace_norm(M: np.ndarray) -> float:
    """Sum of singular values; eigenvalue path on Hermitian input."""
    A = as_matrix(M)
    if A.shape[0] == A.shape[1] and is_hermitian(A):
        return float(np.abs(np.linalg.eigvalsh(hermitize(A))).sum())
    return float(np.linalg.svd(A, compute_uv=False).sum())


def op_norm(M: np.ndarray) -> float:
    """Largest singular value."""
    A = as_matrix(M)
    if A.shape[0] == A.shape[1] and is_hermitian(A):
        return float(np.abs(np.linalg.eigvalsh(hermitize(A))).max())
    return float(np.linalg.svd(A, compute_uv=False).max())


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product with the row-major (a * dim_B + b) convention."""
    return np.kron(as_matrix(A), as_matrix(B))


def _split_dims(M: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    dA, dB = dims
    A = as_matrix(M)
    if A.shape != (dA * dB, dA * dB):
        raise DimensionMismatch(f"matrix shape {A.shape} does not factor as ({dA}*{dB})^2")
    return A.reshape(dA, dB, dA, dB)


def partial_trace(
    M: np.ndarray, dims: tuple[int, int], which: Literal["first", "second"]
) -> np.ndarray:
    """Trace out one tensor factor of an operator on A (x) B."""
    T = _split_dims(M, dims)
    if which == "first":
        return np.einsum("aiaj->ij", T)
    if which == "second":
        return np.einsum("iaja->ij", T)
    raise ValueError(f"which must be 'first' or 'second', got {which!r}")


def partial_transpose(
    M: np.ndarray, dims: tuple[int, int], which: Literal["first", "second"]
) -> np.ndarray:
    """Transpose one tensor factor of an operator on A (x) B."""
    T = _split_dims(M, dims)
    dA, dB = dims
    if which == "first":
        out = T.transpose(2, 1, 0, 3)
    elif which == "second":
        out = T.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"which must be 'first' or 'second', got {which!r}")
    return out.reshape(dA * dB, dA * dB)


def herm_basis(n: int) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) basis of n x n Hermitian matrices."""
    basis: list[np.ndarray] = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            S = np.zeros((n, n), dtype=complex)
            S[i, j] = inv_sqrt2
            S[j, i] = inv_sqrt2
            basis.append(S)
            A = np.zeros((n, n), dtype=complex)
            A[i, j] = -1j * inv_sqrt2
            A[j, i] = 1j * inv_sqrt2
            basis.append(A)
    return basis
