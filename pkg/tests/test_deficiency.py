import numpy as np
import pytest

from qcomp import deficiency as dfc
from qcomp import maps, norms, randomgen
from qcomp.discrimination import Povm
from qcomp.errors import DimensionMismatch, NotSpanning, ValidationError


def depolarizing(d: int) -> maps.HermitianMap:
    return norms.erasure_map(np.eye(d, dtype=complex) / d, d)


def test_self_deficiency_is_zero():
    g = randomgen.rng(0)
    phi = randomgen.random_channel(g, 2, 2)
    value, alpha = dfc.deficiency_value(phi, phi)
    assert value == pytest.approx(0.0, abs=1e-6)
    assert maps.is_channel(alpha)


def test_exact_postprocessing_gives_zero():
    g = randomgen.rng(1)
    psi = randomgen.random_channel(g, 2, 3)
    beta = randomgen.random_channel(g, 3, 2)
    phi = maps.compose(beta, psi)
    value, _ = dfc.deficiency_value(phi, psi)
    assert value == pytest.approx(0.0, abs=1e-6)


def test_identity_vs_depolarizing_benchmark():
    ident = maps.identity_map(2)
    depol = depolarizing(2)
    value, alpha = dfc.deficiency_value(ident, depol)
    assert value == pytest.approx(1.5, abs=1e-5)
    assert maps.is_channel(alpha)
    # depolarizing is reachable from the identity, so the reverse is zero
    rev, _ = dfc.deficiency_value(depol, ident)
    assert rev == pytest.approx(0.0, abs=1e-6)
    assert dfc.lecam_distance(ident, depol) == pytest.approx(1.5, abs=1e-5)


def test_two_sided_certificate_closes():
    ident = maps.identity_map(2)
    depol = depolarizing(2)
    res = dfc.deficiency(ident, depol)
    assert res.value == pytest.approx(1.5, abs=1e-5)
    assert res.certified_gap < 1e-6
    assert maps.is_channel(res.optimal_postprocessing)
    # the witness is CP with dual diamond norm at most one
    assert maps.is_cp(res.witness)
    assert norms.dual_diamond_norm_cp(res.witness) <= 1.0 + 1e-6
    assert dfc.witness_objective(res.witness, ident, depol) == pytest.approx(
        res.value, abs=1e-5
    )


def test_postprocessing_attains_value():
    g = randomgen.rng(2)
    phi = randomgen.random_channel(g, 2, 2)
    psi = randomgen.random_channel(g, 2, 2)
    value, alpha = dfc.deficiency_value(phi, psi)
    attained = norms.diamond_norm(phi - maps.compose(alpha, psi))
    assert attained == pytest.approx(value, abs=1e-5)


def test_deficiency_bounded_by_diamond_distance():
    g = randomgen.rng(3)
    phi = randomgen.random_channel(g, 2, 2)
    psi = randomgen.random_channel(g, 2, 2)
    value, _ = dfc.deficiency_value(phi, psi)
    assert value <= norms.diamond_norm(phi - psi) + 1e-6
    assert -1e-8 <= value <= 2.0 + 1e-8


def test_data_processing_monotonicity():
    g = randomgen.rng(4)
    phi2 = randomgen.random_channel(g, 2, 2)
    psi = randomgen.random_channel(g, 2, 2)
    beta = randomgen.random_channel(g, 2, 2)
    d1, d2 = dfc.data_processing_check(phi2, psi, beta)
    assert d1 <= d2 + 1e-7
    d1, d2 = dfc.data_processing_check_dual(phi2, psi, beta)
    assert d1 >= d2 - 1e-7


def test_povm_gap_zero_for_equal_channels():
    g = randomgen.rng(5)
    phi = randomgen.random_channel(g, 2, 2)
    M = Povm(tuple(randomgen.random_povm(g, 2, 3)))
    res = dfc.povm_postprocessing_gap(phi, phi, M)
    assert res.gap == pytest.approx(0.0, abs=1e-7)
    assert res.povm.n == 3 and res.povm.dim == 2


def test_povm_gap_bounded_by_twice_deficiency():
    ident = maps.identity_map(2)
    depol = depolarizing(2)
    delta, _ = dfc.deficiency_value(ident, depol)
    M = dfc.standard_basis_povm(2)
    res = dfc.povm_postprocessing_gap(ident, depol, M)
    assert res.gap <= 2.0 * delta + 1e-6
    # after the measurement the pair is the classical identity versus a
    # constant distribution q on two symbols; the distance is
    # max(2(1 - q0), 2 q0), minimized at q = uniform with value 1
    assert res.gap == pytest.approx(1.0, abs=1e-5)


def test_standard_basis_povm():
    M = dfc.standard_basis_povm(3)
    assert M.n == 3 and M.dim == 3
    assert np.allclose(sum(M.elements), np.eye(3))


def test_minimax_scan_slacks_nonnegative():
    ident = maps.identity_map(2)
    depol = depolarizing(2)
    report = dfc.thm1_verify(ident, depol, trials=5, seed=11)
    assert report["delta"] == pytest.approx(1.5, abs=1e-5)
    assert report["certified_gap"] < 1e-6
    assert report["min_slack_ii"] >= -1e-6
    assert report["min_slack_iii"] >= -1e-6


def test_spanning_ancilla_scan_detects_simulability():
    g = randomgen.rng(6)
    psi = randomgen.random_channel(g, 2, 2)
    alpha = randomgen.random_channel(g, 2, 2)
    phi = maps.compose(alpha, psi)
    sigmas = [
        np.diag([1.0, 0.0]).astype(complex),
        np.diag([0.0, 1.0]).astype(complex),
        np.ones((2, 2), dtype=complex) / 2.0,
        np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex),
    ]
    report = dfc.thm2_coro1_scan(phi, psi, sigmas, trials=3, seed=7)
    assert report["max_gap"] <= 1e-6


def test_require_spanning():
    P0 = np.diag([1.0, 0.0]).astype(complex)
    good = [
        P0,
        np.diag([0.0, 1.0]).astype(complex),
        np.ones((2, 2), dtype=complex) / 2.0,
        np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex),
    ]
    dfc.require_spanning(good, 2)
    with pytest.raises(NotSpanning):
        dfc.require_spanning(good[:3], 2)
    with pytest.raises(NotSpanning):
        dfc.require_spanning([P0, P0, P0, P0], 2)


def test_classical_comparison_scan_smoke():
    ident = maps.identity_map(2)
    depol = depolarizing(2)
    report = dfc.classical_comparison_scan(ident, depol, k=2, trials=1, seed=3)
    for key in ("stat_i", "stat_ii", "stat_iii", "stat_iv"):
        assert np.isfinite(report[key])
    # every sampled statistic lower-bounds the achievable epsilon = delta/2
    delta, _ = dfc.deficiency_value(ident, depol)
    for key in ("stat_i", "stat_ii", "stat_iii", "stat_iv"):
        assert report[key] <= delta / 2.0 + 1e-6


def test_dimension_validation():
    g = randomgen.rng(7)
    phi = randomgen.random_channel(g, 2, 2)
    psi = randomgen.random_channel(g, 3, 2)
    with pytest.raises(DimensionMismatch):
        dfc.deficiency_value(phi, psi)
    M3 = dfc.standard_basis_povm(3)
    with pytest.raises(DimensionMismatch):
        dfc.povm_postprocessing_gap(phi, phi, M3)
    with pytest.raises(ValidationError):
        dfc.deficiency_value(phi * 2.0, phi)
