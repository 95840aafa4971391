"""Seeded random instances for the randomized property suites."""

from __future__ import annotations

import numpy as np

from .operators import DensityOperator, HermitianOperator, Ket

GENERATOR_NAME = "pcg64"

__all__ = [
    "GENERATOR_NAME",
    "make_rng",
    "random_hermitian",
    "random_pure_ket",
    "random_density",
    "random_pom",
]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _complex_normal(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_hermitian(dim: int, rng, scale: float = 1.0) -> HermitianOperator:
    g = _complex_normal(rng, dim, dim)
    return HermitianOperator(scale * (g + g.conj().T) / 2)


def random_pure_ket(dim: int, rng) -> Ket:
    return Ket(_complex_normal(rng, dim))


def random_density(dim: int, rng, rank: int | None = None) -> DensityOperator:
    rank = dim if rank is None else rank
    g = _complex_normal(rng, dim, rank)
    mat = g @ g.conj().T
    return DensityOperator(mat / np.real(np.trace(mat)))


def random_pom(dim: int, n_outcomes: int, rng):
    """Random full-rank POM: PSD pieces whitened to sum to the identity."""
    from .pom import Pom  # local import to avoid a cycle

    pieces = []
    for _ in range(n_outcomes):
        g = _complex_normal(rng, dim, dim)
        pieces.append(g @ g.conj().T)
    total = np.sum(pieces, axis=0)
    vals, vecs = np.linalg.eigh(total)
    whiten = (vecs * vals**-0.5) @ vecs.conj().T
    ops = [whiten @ p @ whiten for p in pieces]
    return Pom.from_operators(ops, values=np.arange(n_outcomes, dtype=float), kind="random")
