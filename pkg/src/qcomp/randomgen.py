"""Seeded random instances: states, channels, ensembles, experiments.

All randomness flows from one user-visible 64-bit seed through numpy's
counter-based Philox bit generator; scans split per-trial streams with
``spawn`` so trials are reproducible independently of execution order.
Channels are drawn Ginibre-Stinespring style: a Haar-like random
isometry into a dilation with configurable environment dimension.
"""

from __future__ import annotations

import numpy as np

from . import linalg, maps
from .errors import DimensionMismatch
from .maps import HermitianMap


def rng(seed: int) -> np.random.Generator:
    """Counter-based generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def spawn_streams(g: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Split n independent child streams off a generator."""
    return list(g.spawn(n))


def ginibre(g: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Complex standard normal matrix."""
    return g.standard_normal((rows, cols)) + 1j * g.standard_normal((rows, cols))


def random_hermitian(g: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    G = ginibre(g, d, d)
    return scale * (G + G.conj().T) / 2.0


def random_psd(g: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    r = d if rank is None else max(1, min(rank, d))
    G = ginibre(g, d, r)
    return G @ G.conj().T


def random_state(g: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    P = random_psd(g, d, rank)
    return P / np.real(np.trace(P))


def random_unitary(g: np.random.Generator, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(ginibre(g, d, d))
    phases = np.diag(R).copy()
    phases = phases / np.abs(phases)
    return Q * phases


def random_channel(
    g: np.random.Generator, d_in: int, d_out: int, env: int | None = None
) -> HermitianMap:
    """Ginibre-Stinespring random channel with environment dimension env."""
    if env is None:
        env = d_in
    if d_out * env < d_in:
        raise DimensionMismatch(
            f"dilation too small: d_out*env = {d_out * env} < d_in = {d_in}"
        )
    G = ginibre(g, d_out * env, d_in)
    Q, _ = np.linalg.qr(G)
    V = Q[:, :d_in].reshape(d_out, env, d_in)
    kraus = [V[:, e, :] for e in range(env)]
    return maps.map_from_kraus(kraus)


def random_cp_map(
    g: np.random.Generator, d_in: int, d_out: int, rank: int | None = None
) -> HermitianMap:
    """Random CP map with Choi trace normalized to d_in."""
    n = d_out * d_in
    r = n if rank is None else max(1, min(rank, n))
    W = ginibre(g, n, r)
    C = W @ W.conj().T
    C *= d_in / np.real(np.trace(C))
    return HermitianMap(d_in, d_out, C)


def random_hermitian_map(g: np.random.Generator, d_in: int, d_out: int) -> HermitianMap:
    """Random Hermiticity-preserving map (Choi a GUE-like Hermitian)."""
    n = d_out * d_in
    return HermitianMap(d_in, d_out, random_hermitian(g, n, scale=1.0 / np.sqrt(n)))


def random_povm(g: np.random.Generator, d: int, n: int) -> list[np.ndarray]:
    """POVM from n random PSD seeds, symmetrized to sum exactly to I."""
    seeds = [random_psd(g, d) + 1e-6 * np.eye(d) for _ in range(n)]
    S = sum(seeds)
    w, V = linalg.herm_eig(S)
    inv_sqrt = (V * (1.0 / np.sqrt(w))) @ V.conj().T
    return [linalg.hermitize(inv_sqrt @ M @ inv_sqrt) for M in seeds]


def random_weights(g: np.random.Generator, n: int) -> np.ndarray:
    w = g.dirichlet(np.ones(n))
    # Keep weights strictly positive and exactly normalized.
    w = np.clip(w, 1e-9, None)
    return w / w.sum()
