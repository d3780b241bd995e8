"""Seeded random generators for states, unitaries, channels and POVMs.

Used by the randomized soundness harnesses and the demos; every function
takes an explicit ``numpy.random.Generator`` so runs stay reproducible.
"""

from __future__ import annotations

import numpy as np

from .linalg import POVM, DensityOperator, KrausChannel


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityOperator:
    """Ginibre-induced random mixed state of the given (optional) rank."""
    r = rank or dim
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish random unitary via QR of a complex Gaussian matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_channel(rng: np.random.Generator, dim: int, n_kraus: int = 2) -> KrausChannel:
    """Random trace-preserving channel from a Stinespring isometry."""
    g = rng.normal(size=(dim * n_kraus, dim)) + 1j * rng.normal(size=(dim * n_kraus, dim))
    q, _ = np.linalg.qr(g)  # q has orthonormal columns: q^dag q = I_dim
    kraus = tuple(q[i * dim : (i + 1) * dim, :] for i in range(n_kraus))
    return KrausChannel(kraus)


def random_povm(rng: np.random.Generator, dim: int, n_outcomes: int = 2, name: str = "random") -> POVM:
    """Random POVM: normalise random PSD effects by the inverse root of their sum."""
    raw = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raw.append(g @ g.conj().T)
    total = np.sum(raw, axis=0)
    eigvals, eigvecs = np.linalg.eigh(total)
    inv_root = eigvecs @ np.diag(eigvals ** -0.5) @ eigvecs.conj().T
    outcomes = tuple((str(i), inv_root @ e @ inv_root) for i, e in enumerate(raw))
    return POVM(outcomes, name=name)


def random_distribution(rng: np.random.Generator, n: int) -> dict:
    w = rng.random(n) + 1e-12
    w /= w.sum()
    return {str(i): float(p) for i, p in enumerate(w)}
