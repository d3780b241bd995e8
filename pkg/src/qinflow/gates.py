"""Common gates, basis states and helpers for building multi-factor operators."""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError
from .linalg import POVM, DensityOperator, pure_state, tensor_all

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = (KET0 + KET1) / math.sqrt(2)
KET_MINUS = (KET0 - KET1) / math.sqrt(2)


def rx(theta: float) -> np.ndarray:
    """Rotation about the x axis of the Bloch sphere."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def basis_ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def ket(bits: str) -> np.ndarray:
    """Computational-basis product state from a bit string, e.g. ``ket("10")``."""
    vecs = [KET0 if b == "0" else KET1 for b in bits]
    out = np.ones(1, dtype=complex)
    for v in vecs:
        out = np.kron(out, v)
    return out


def bell_pair() -> np.ndarray:
    """(|00> + |11>) / sqrt(2)."""
    return (ket("00") + ket("11")) / math.sqrt(2)


def basis_density(bits: str) -> DensityOperator:
    return pure_state(ket(bits))


def lift_operator(op: np.ndarray, dims, start: int) -> np.ndarray:
    """Embed ``op`` acting on the contiguous factors ``start..`` of ``dims``.

    The operator's dimension must equal the product of the covered factors.
    """
    dims = tuple(int(d) for d in dims)
    d_op = op.shape[0]
    covered = 1
    end = start
    while covered < d_op and end < len(dims):
        covered *= dims[end]
        end += 1
    if covered != d_op:
        raise DimensionError(
            f"operator of dim {d_op} does not align with factors {dims} at position {start}"
        )
    before = math.prod(dims[:start]) if start > 0 else 1
    after = math.prod(dims[end:]) if end < len(dims) else 1
    return tensor_all([np.eye(before), op, np.eye(after)])


def computational_povm(dim: int, name: str = "computational") -> POVM:
    """Full computational-basis measurement on a ``dim``-dimensional space."""
    outcomes = tuple((str(i), np.outer(basis_ket(i, dim), basis_ket(i, dim).conj())) for i in range(dim))
    return POVM(outcomes, name=name)


def factor_basis_povm(dims, factor: int, name: str | None = None) -> POVM:
    """Computational-basis measurement of one factor, lifted to the whole space."""
    dims = tuple(int(d) for d in dims)
    d = dims[factor]
    if name is None:
        name = f"basis@{factor}"
    outcomes = []
    for i in range(d):
        proj = np.outer(basis_ket(i, d), basis_ket(i, d).conj())
        outcomes.append((str(i), lift_operator(proj, dims, factor)))
    return POVM(tuple(outcomes), name=name)
