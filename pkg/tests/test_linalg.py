import numpy as np
import pytest

from qcomp import linalg
from qcomp.errors import DimensionMismatch, NotHermitian


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def test_hermitize_and_checks():
    rng = np.random.default_rng(0)
    H = random_hermitian(rng, 4)
    assert linalg.is_hermitian(H)
    G = H + 1e-3 * 1j * np.eye(4)
    assert not linalg.is_hermitian(G)
    back = linalg.hermitize(G)
    assert linalg.is_hermitian(back)
    assert np.allclose(linalg.require_hermitian(H), H)
    with pytest.raises(NotHermitian):
        linalg.require_hermitian(G)
    with pytest.raises(NotHermitian):
        linalg.require_hermitian(np.ones((2, 3)))


def test_eig_order_and_min_eig():
    H = np.diag([3.0, -1.0, 2.0]).astype(complex)
    w, V = linalg.herm_eig(H)
    assert np.allclose(w, [3.0, 2.0, -1.0])
    assert np.allclose(V @ np.diag(w) @ V.conj().T, H)
    assert linalg.min_eig(H) == pytest.approx(-1.0)
    assert not linalg.is_psd(H)
    assert linalg.is_psd(H + np.eye(3))


def test_trace_and_op_norms():
    rng = np.random.default_rng(1)
    H = random_hermitian(rng, 5)
    ev = np.linalg.eigvalsh(H)
    assert linalg.trace_norm(H) == pytest.approx(np.abs(ev).sum(), abs=1e-12)
    assert linalg.op_norm(H) == pytest.approx(np.abs(ev).max(), abs=1e-12)
    # non-Hermitian falls back to singular values
    A = rng.normal(size=(3, 4))
    sv = np.linalg.svd(A, compute_uv=False)
    assert linalg.trace_norm(A) == pytest.approx(sv.sum(), abs=1e-12)
    assert linalg.op_norm(A) == pytest.approx(sv.max(), abs=1e-12)


def test_partial_trace_of_kron():
    rng = np.random.default_rng(2)
    A = random_hermitian(rng, 2)
    B = random_hermitian(rng, 3)
    M = linalg.kron(A, B)
    assert np.allclose(
        linalg.partial_trace(M, (2, 3), "first"), np.trace(A) * B, atol=1e-12
    )
    assert np.allclose(
        linalg.partial_trace(M, (2, 3), "second"), np.trace(B) * A, atol=1e-12
    )
    with pytest.raises(DimensionMismatch):
        linalg.partial_trace(M, (2, 2), "first")


def test_partial_transpose():
    rng = np.random.default_rng(3)
    A = random_hermitian(rng, 2)
    B = random_hermitian(rng, 2)
    M = linalg.kron(A, B)
    assert np.allclose(linalg.partial_transpose(M, (2, 2), "first"), linalg.kron(A.T, B))
    assert np.allclose(linalg.partial_transpose(M, (2, 2), "second"), linalg.kron(A, B.T))
    # involution
    X = random_hermitian(rng, 4)
    again = linalg.partial_transpose(
        linalg.partial_transpose(X, (2, 2), "second"), (2, 2), "second"
    )
    assert np.allclose(again, X)


def test_herm_basis_orthonormal_and_complete():
    for n in (2, 3):
        basis = linalg.herm_basis(n)
        assert len(basis) == n * n
        for i, F in enumerate(basis):
            assert linalg.is_hermitian(F)
            for j, G in enumerate(basis):
                ip = float(np.real(np.trace(F @ G)))
                assert ip == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)
        # expansion reproduces an arbitrary Hermitian matrix
        rng = np.random.default_rng(4 + n)
        H = random_hermitian(rng, n)
        rebuilt = sum(np.real(np.trace(F @ H)) * F for F in basis)
        assert np.allclose(rebuilt, H, atol=1e-12)
