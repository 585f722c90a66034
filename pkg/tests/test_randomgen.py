import numpy as np

from qcomp import linalg, maps, randomgen


def test_determinism_per_seed():
    a = randomgen.random_channel(randomgen.rng(42), 2, 3)
    b = randomgen.random_channel(randomgen.rng(42), 2, 3)
    c = randomgen.random_channel(randomgen.rng(43), 2, 3)
    assert np.array_equal(a.choi, b.choi)
    assert not np.allclose(a.choi, c.choi)


def test_spawned_streams_differ():
    g = randomgen.rng(7)
    s1, s2 = randomgen.spawn_streams(g, 2)
    assert not np.allclose(s1.normal(size=4), s2.normal(size=4))


def test_random_objects_are_valid():
    g = randomgen.rng(1)
    state = randomgen.random_state(g, 3)
    assert linalg.is_psd(state)
    np.testing.assert_allclose(np.trace(state).real, 1.0, atol=1e-12)

    U = randomgen.random_unitary(g, 3)
    assert np.allclose(U @ U.conj().T, np.eye(3), atol=1e-10)

    chan = randomgen.random_channel(g, 2, 3)
    assert maps.is_channel(chan)

    cp = randomgen.random_cp_map(g, 2, 2)
    assert maps.is_cp(cp)

    povm = randomgen.random_povm(g, 2, 4)
    assert np.allclose(sum(povm), np.eye(2), atol=1e-10)
    for M in povm:
        assert linalg.is_psd(M)

    w = randomgen.random_weights(g, 5)
    assert np.all(w > 0)
    np.testing.assert_allclose(w.sum(), 1.0, atol=1e-12)
