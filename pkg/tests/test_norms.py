import numpy as np
import pytest

from qcomp import linalg, maps, norms, randomgen
from qcomp.errors import DimensionMismatch


def test_identity_channel_norms():
    for d in (2, 3):
        idm = maps.identity_map(d)
        assert norms.diamond_norm(idm) == pytest.approx(1.0, abs=1e-8)
        assert norms.dual_diamond_norm(idm) == pytest.approx(d * d, abs=1e-6)
        assert norms.diamond_norm_cp(idm) == pytest.approx(1.0, abs=1e-12)
        assert norms.dual_diamond_norm_cp(idm) == pytest.approx(d * d, abs=1e-6)


def test_erasure_channel_norms():
    g = randomgen.rng(0)
    sigma = randomgen.random_state(g, 2)
    er = norms.erasure_map(sigma, 3)
    assert np.allclose(er.choi, np.kron(sigma, np.eye(3)))
    assert norms.diamond_norm(er) == pytest.approx(1.0, abs=1e-8)
    # dominating rho = sigma is optimal, so the dual norm is Tr sigma = 1
    assert norms.dual_diamond_norm(er) == pytest.approx(1.0, abs=1e-8)


def test_unitary_conjugation_norms():
    g = randomgen.rng(1)
    U = randomgen.random_unitary(g, 2)
    phi = maps.map_from_kraus([U])
    assert norms.diamond_norm(phi) == pytest.approx(1.0, abs=1e-8)
    assert norms.dual_diamond_norm(phi) == pytest.approx(4.0, abs=1e-6)


def test_homogeneity_and_zero_map():
    g = randomgen.rng(2)
    phi = randomgen.random_hermitian_map(g, 2, 2)
    one = norms.diamond_norm(phi)
    assert norms.diamond_norm(phi * 2.0) == pytest.approx(2.0 * one, abs=1e-6)
    zero = phi - phi
    assert norms.diamond_norm(zero) == pytest.approx(0.0, abs=1e-8)


def test_identity_minus_depolarizing_value():
    # ||id_d - erasure to I/d||_diamond = 2 - 2/d^2
    for d in (2, 3):
        diff = maps.identity_map(d) - norms.erasure_map(np.eye(d, dtype=complex) / d, d)
        assert norms.diamond_norm(diff) == pytest.approx(2.0 - 2.0 / d**2, abs=1e-6)


def test_dual_norm_bounds_pairing():
    g = randomgen.rng(3)
    for _ in range(5):
        psi = randomgen.random_hermitian_map(g, 2, 2)
        phi = randomgen.random_hermitian_map(g, 2, 2)
        lhs = maps.pairing(psi, phi)
        assert lhs <= norms.diamond_norm(phi) * norms.dual_diamond_norm(psi) + 1e-7


def test_cp_closed_forms_match_generic_sdps():
    g = randomgen.rng(4)
    for _ in range(5):
        phi = randomgen.random_cp_map(g, 2, 2)
        assert norms.diamond_norm_cp(phi) == pytest.approx(
            norms.diamond_norm(phi), abs=1e-7
        )
        assert norms.dual_diamond_norm_cp(phi) == pytest.approx(
            norms.dual_diamond_norm(phi), abs=1e-7
        )


def test_cq_norms_pauli_pair():
    Z = np.diag([1.0, -1.0]).astype(complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    diamond, dual = norms.cq_norms([Z, X])
    assert diamond == pytest.approx(2.0, abs=1e-9)
    assert dual == pytest.approx(2.0, abs=1e-7)


def test_cq_qc_formulas_match_generic():
    g = randomgen.rng(5)
    for _ in range(3):
        ops = [randomgen.random_hermitian(g, 2) for _ in range(3)]
        cq_d, cq_dd = norms.cq_norms(ops)
        phi = maps.cq_map(ops)
        assert cq_d == pytest.approx(norms.diamond_norm(phi), abs=1e-7)
        assert cq_dd == pytest.approx(norms.dual_diamond_norm(phi), abs=1e-7)

        qc_d, qc_dd = norms.qc_norms(ops)
        psi = maps.qc_map(ops)
        assert qc_d == pytest.approx(norms.diamond_norm(psi), abs=1e-7)
        assert qc_dd == pytest.approx(norms.dual_diamond_norm(psi), abs=1e-7)


def test_qc_dual_is_sum_of_operator_norms():
    g = randomgen.rng(6)
    ops = [randomgen.random_hermitian(g, 3) for _ in range(2)]
    _, dual = norms.qc_norms(ops)
    assert dual == pytest.approx(sum(linalg.op_norm(B) for B in ops), abs=1e-12)


def test_witness_distance_equals_diamond_distance():
    g = randomgen.rng(7)
    for _ in range(3):
        phi = randomgen.random_channel(g, 2, 2)
        psi = randomgen.random_channel(g, 2, 2)
        value, gamma = norms.witness_distance(phi, psi)
        direct = norms.diamond_norm(phi - psi)
        assert value == pytest.approx(direct, abs=1e-6)
        # the witness is CP with dual norm at most one and reproduces the value
        assert maps.is_cp(gamma, tol=1e-7)
        assert norms.dual_diamond_norm_cp(gamma) <= 1.0 + 1e-6
        assert 2.0 * maps.pairing(gamma, phi - psi) == pytest.approx(value, abs=1e-5)


def test_contraction_under_preprocessing():
    g = randomgen.rng(8)
    phi = randomgen.random_hermitian_map(g, 2, 2)
    alpha = randomgen.random_channel(g, 2, 2)
    assert norms.diamond_norm(maps.compose(phi, alpha)) <= norms.diamond_norm(phi) + 1e-8


def test_stabilization_under_tensor_identity():
    g = randomgen.rng(9)
    phi = randomgen.random_hermitian_map(g, 2, 2)
    big = maps.tensor(phi, maps.identity_map(2))
    assert norms.diamond_norm(big) == pytest.approx(norms.diamond_norm(phi), abs=1e-6)


def test_shape_validation():
    with pytest.raises(DimensionMismatch):
        norms.cq_norms([])
    with pytest.raises(DimensionMismatch):
        norms.cq_norms([np.eye(2, dtype=complex), np.eye(3, dtype=complex)])
    g = randomgen.rng(10)
    with pytest.raises(DimensionMismatch):
        norms.witness_distance(
            randomgen.random_channel(g, 2, 2), randomgen.random_channel(g, 2, 3)
        )
