"""Seeded randomness: every generator is a Philox stream keyed by a seed."""

import numpy as np


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn(seed, count: int) -> list:
    """``count`` independent generators derived from ``seed``."""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(count)]


def orthonormal_columns(z: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt on the columns of a complex matrix of full column rank."""
    q = np.array(z, dtype=np.complex128)
    for k in range(q.shape[1]):
        for _ in range(2):
            for j in range(k):
                q[:, k] -= (q[:, j].conj() @ q[:, k]) * q[:, j]
        q[:, k] /= np.linalg.norm(q[:, k])
    return q


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
