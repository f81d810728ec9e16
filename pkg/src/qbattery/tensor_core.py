"""Many-body spin operators on N qubits built from single-site Pauli matrices.

Conventions: site 0 is the leftmost (most significant) tensor factor, so the
computational basis index of a product state is ``sum(bit_r * 2**(N-1-r))``.
All operators are dense complex matrices; ``hbar = 1`` throughout.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_SITES = 12
_MAX_SITES_ENV = "QBATTERY_MAX_SITES"

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    "identity": np.eye(2, dtype=complex),
}


def max_sites() -> int:
    """Current cap on the chain length (env ``QBATTERY_MAX_SITES`` overrides)."""
    raw = os.environ.get(_MAX_SITES_ENV)
    if raw is None:
        return DEFAULT_MAX_SITES
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{_MAX_SITES_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{_MAX_SITES_ENV} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class Operator:
    """Dense operator on an N-qubit Hilbert space.

    The wrapped matrix is made read-only so instances can be shared across
    concurrent workers.
    """

    matrix: np.ndarray
    n_sites: int
    hermitian: bool = False

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {mat.shape}")
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {self.n_sites}")
        if mat.shape[0] != 2**self.n_sites:
            raise ValueError(
                f"dimension {mat.shape[0]} does not match 2**{self.n_sites}"
            )
        if not np.all(np.isfinite(mat.view(float))):
            raise ValueError("operator entries must be finite")
        mat = np.ascontiguousarray(mat)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def pauli(axis: str) -> Operator:
    """Single-site Pauli matrix for ``axis`` in {'x', 'y', 'z', 'identity'}."""
    if axis not in _PAULI:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return Operator(_PAULI[axis].copy(), n_sites=1, hermitian=True)


def embed_site(op: Operator, site: int, n: int) -> Operator:
    """Embed a single-site operator at ``site`` in an ``n``-site chain.

    Returns I (x) ... (x) op (x) ... (x) I with ``op`` as the ``site``-th
    tensor factor counted from the left.
    """
    if op.dim != 2:
        raise ValueError(f"embed_site expects a single-site operator, got dim {op.dim}")
    if n < 1 or n > max_sites():
        raise ValueError(f"n={n} outside the allowed range [1, {max_sites()}]")
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for n={n}")
    left = np.eye(2**site, dtype=complex)
    right = np.eye(2 ** (n - site - 1), dtype=complex)
    full = np.kron(np.kron(left, op.matrix), right)
    return Operator(full, n_sites=n, hermitian=op.hermitian)


def two_site_term(
    op_a: Operator, op_b: Operator, r: int, n: int, boundary: str = "periodic"
) -> Operator:
    """Product of ``op_a`` at site ``r`` and ``op_b`` at site ``r+1``.

    With periodic boundary the neighbor index wraps mod ``n``; with open
    boundary ``r = n-1`` is rejected.
    """
    if boundary not in ("periodic", "open"):
        raise ValueError(f"unknown boundary {boundary!r}")
    if not 0 <= r < n:
        raise ValueError(f"site {r} out of range for n={n}")
    if boundary == "open" and r == n - 1:
        raise ValueError(f"open boundary has no bond at r={r} for n={n}")
    a = embed_site(op_a, r, n)
    b = embed_site(op_b, (r + 1) % n, n)
    hermitian = op_a.hermitian and op_b.hermitian and (r + 1) % n != r
    return Operator(a.matrix @ b.matrix, n_sites=n, hermitian=hermitian)


def bond_pairs(n: int, boundary: str = "periodic") -> list[tuple[int, int]]:
    """Unique nearest-neighbor bonds of an ``n``-site chain.

    The two-site ring has exactly one bond; wrapping the sum there would
    count the same physical coupling twice.
    """
    if boundary not in ("periodic", "open"):
        raise ValueError(f"unknown boundary {boundary!r}")
    if n < 2:
        raise ValueError(f"bonds need n >= 2, got n={n}")
    if boundary == "open" or n == 2:
        return [(r, r + 1) for r in range(n - 1)]
    return [(r, (r + 1) % n) for r in range(n)]
