import numpy as np
import pytest

from qcomp import linalg, maps, randomgen
from qcomp.errors import (
    DimensionMismatch,
    NotAChannel,
    NotCompletelyPositive,
    NotHermitian,
)


def test_identity_map_choi_and_apply():
    for d in (2, 3):
        idm = maps.identity_map(d)
        # Choi of the identity is the unnormalized maximally entangled kernel
        kernel = maps.max_entangled_kernel(d)
        assert np.allclose(idm.choi, kernel)
        rng = np.random.default_rng(d)
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        A = (A + A.conj().T) / 2
        assert np.allclose(maps.apply(idm, A), A, atol=1e-12)


def test_apply_matches_kraus():
    g = randomgen.rng(5)
    K1 = randomgen.ginibre(g, 3, 2)
    K2 = randomgen.ginibre(g, 3, 2)
    phi = maps.map_from_kraus([K1, K2])
    rho = randomgen.random_state(g, 2)
    direct = K1 @ rho @ K1.conj().T + K2 @ rho @ K2.conj().T
    assert np.allclose(maps.apply(phi, rho), direct, atol=1e-12)
    assert maps.is_cp(phi)


def test_compose_adjoint_tensor():
    g = randomgen.rng(6)
    phi = randomgen.random_hermitian_map(g, 2, 3)
    psi = randomgen.random_hermitian_map(g, 3, 2)
    rho = randomgen.random_hermitian(g, 2)
    chained = maps.apply(psi, maps.apply(phi, rho))
    assert np.allclose(maps.apply(maps.compose(psi, phi), rho), chained, atol=1e-10)

    # adjoint: <phi(A), B> = <A, phi*(B)>
    A = randomgen.random_hermitian(g, 2)
    B = randomgen.random_hermitian(g, 3)
    lhs = np.trace(maps.apply(phi, A).conj().T @ B)
    rhs = np.trace(A.conj().T @ maps.apply(maps.adjoint(phi), B))
    assert lhs == pytest.approx(rhs, abs=1e-10)

    # tensor acts factorwise on kron inputs
    tau = randomgen.random_hermitian(g, 3)
    both = maps.tensor(phi, psi)
    out = maps.apply(both, np.kron(A, tau))
    assert np.allclose(out, np.kron(maps.apply(phi, A), maps.apply(psi, tau)), atol=1e-10)


def test_cq_and_qc_maps():
    g = randomgen.rng(7)
    ops = [randomgen.random_hermitian(g, 2) for _ in range(3)]
    cq = maps.cq_map(ops)
    assert (cq.d_in, cq.d_out) == (3, 2)
    p = np.diag([0.2, 0.5, 0.3]).astype(complex)
    expect = sum(p[i, i] * ops[i] for i in range(3))
    assert np.allclose(maps.apply(cq, p), expect, atol=1e-12)

    povm = randomgen.random_povm(g, 2, 3)
    qc = maps.qc_map(povm)
    assert (qc.d_in, qc.d_out) == (2, 3)
    rho = randomgen.random_state(g, 2)
    out = maps.apply(qc, rho)
    probs = np.real(np.diag(out))
    expect_probs = [np.real(np.trace(rho @ M)) for M in povm]
    assert np.allclose(probs, expect_probs, atol=1e-12)
    assert np.abs(out - np.diag(np.diag(out))).max() < 1e-12
    assert maps.is_channel(qc)


def test_pinching_kills_offdiagonals():
    pin = maps.pinching(3)
    g = randomgen.rng(8)
    rho = randomgen.random_state(g, 3)
    out = maps.apply(pin, rho)
    assert np.allclose(out, np.diag(np.diag(rho)), atol=1e-12)
    assert maps.is_channel(pin)


def test_s_functional_and_pairing():
    assert maps.s_functional(maps.identity_map(2)) == pytest.approx(4.0)
    sigma = np.array([[0.7, 0.1], [0.1, 0.3]], dtype=complex)
    from qcomp.norms import erasure_map

    assert maps.s_functional(erasure_map(sigma, 2)) == pytest.approx(1.0)

    g = randomgen.rng(9)
    phi = randomgen.random_hermitian_map(g, 2, 2)
    psi = randomgen.random_hermitian_map(g, 2, 2)
    assert maps.pairing(psi, phi) == pytest.approx(maps.pairing(phi, psi), abs=1e-10)
    # bilinearity in the second argument
    two = maps.pairing(psi, phi * 2.0)
    assert two == pytest.approx(2.0 * maps.pairing(psi, phi), abs=1e-10)


def test_validation_errors():
    skew = np.zeros((4, 4), dtype=complex)
    skew[0, 1] = 1.0
    with pytest.raises(NotHermitian):
        maps.HermitianMap(2, 2, skew)
    with pytest.raises(DimensionMismatch):
        maps.HermitianMap(2, 3, np.eye(4, dtype=complex))
    g = randomgen.rng(10)
    herm = randomgen.random_hermitian_map(g, 2, 2)
    if not maps.is_cp(herm):
        with pytest.raises(NotCompletelyPositive):
            maps.require_cp(herm)
    cp = randomgen.random_cp_map(g, 2, 2)
    with pytest.raises(NotAChannel):
        maps.require_channel(cp * 1.7)


def test_project_to_channel_fixes_channels():
    g = randomgen.rng(11)
    chan = randomgen.random_channel(g, 2, 3)
    fixed, shift = maps.project_to_channel(chan)
    assert shift < 1e-9
    assert np.allclose(fixed.choi, chan.choi, atol=1e-8)
    # a CP non-channel gets moved onto the channel set
    cp = randomgen.random_cp_map(g, 2, 2)
    proj, shift2 = maps.project_to_channel(cp)
    assert maps.is_channel(proj)
