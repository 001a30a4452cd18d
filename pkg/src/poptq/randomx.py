"""Seeded random generators for states, vectors and derived seeds."""

import numpy as np


def as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seeds(seed, n):
    """``n`` independent seeds derived from ``seed``.

    Child ``i`` depends only on ``(seed, i)``, so a longer list extends a
    shorter one.
    """
    return np.random.SeedSequence(seed).spawn(n)


def ginibre(d, k, rng):
    return rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))


def random_vector(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d, rng, rank=None):
    g = ginibre(d, d if rank is None else rank, rng)
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_pure(d, rng):
    v = random_vector(d, rng)
    return np.outer(v, v.conj())


def random_hermitian(d, rng):
    g = ginibre(d, d, rng)
    return 0.5 * (g + g.conj().T)
