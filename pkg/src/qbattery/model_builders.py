"""Battery and charger Hamiltonians for the non-Hermitian charging setup.

Batteries are XYZ chains in a transverse field (or a non-interacting sum of
single-site sigma-x terms); chargers are either the local PT-symmetric field
``sigma^x + i sin(alpha) sigma^z`` per site, its Hermitian counterpart, or an
XY ring with imaginary (RT-symmetric) or real (Hermitian) anisotropy.

All couplings are dimensionless with hbar = 1.  Battery spectra are rescaled
to span exactly [-1, 1] so power comparisons across parameters stay fair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense_linalg import (
    REAL_SPECTRUM_TOL,
    general_eigenvalues,
    hermitian_eig,
)
from .errors import DegenerateSpectrumError
from .tensor_core import Operator, bond_pairs, embed_site, max_sites, pauli

PT = "pt"
PT_HERMITIAN = "pt_hermitian"
RT = "rt"
RT_HERMITIAN = "rt_hermitian"
CHARGER_KINDS = (PT, PT_HERMITIAN, RT, RT_HERMITIAN)

UNBROKEN_REAL = "unbroken_real"
BROKEN_COMPLEX = "broken_complex"


@dataclass(frozen=True)
class BatterySpec:
    """XYZ chain parameters: J (xy coupling), gamma (anisotropy), delta (zz
    coupling), h (transverse field), chain length, and boundary condition."""

    J: float
    gamma: float
    delta: float
    h: float
    n_sites: int
    boundary: str = "periodic"

    def __post_init__(self) -> None:
        if self.n_sites < 2:
            raise ValueError("interacting battery needs n_sites >= 2")
        if self.n_sites > max_sites():
            raise ValueError(f"n_sites {self.n_sites} exceeds cap {max_sites()}")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        for name in ("J", "gamma", "delta", "h"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class ChargerSpec:
    """Charger parameters; PT kinds use alpha only, RT kinds use
    (gamma_prime, J, h_prime) only."""

    kind: str
    n_sites: int
    alpha: float | None = None
    gamma_prime: float | None = None
    J: float | None = None
    h_prime: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in CHARGER_KINDS:
            raise ValueError(f"unknown charger kind {self.kind!r}")
        if self.n_sites < 1 or self.n_sites > max_sites():
            raise ValueError(f"n_sites {self.n_sites} outside [1, {max_sites()}]")
        if self.kind in (PT, PT_HERMITIAN):
            if self.alpha is None:
                raise ValueError(f"{self.kind} charger requires alpha")
            if not (self.gamma_prime is None and self.J is None and self.h_prime is None):
                raise ValueError(f"{self.kind} charger uses alpha only")
        else:
            if self.gamma_prime is None or self.J is None or self.h_prime is None:
                raise ValueError(f"{self.kind} charger requires gamma_prime, J, h_prime")
            if self.alpha is not None:
                raise ValueError(f"{self.kind} charger does not take alpha")
            if self.n_sites < 2:
                raise ValueError("RT charger needs n_sites >= 2")


def _field_sum(axis: str, n: int) -> np.ndarray:
    op = pauli(axis)
    total = np.zeros((2**n, 2**n), dtype=complex)
    for r in range(n):
        total += embed_site(op, r, n).matrix
    return total


def _bond_sum(axis_a: str, axis_b: str, n: int, boundary: str) -> np.ndarray:
    total = np.zeros((2**n, 2**n), dtype=complex)
    op_a = pauli(axis_a)
    op_b = pauli(axis_b)
    for r, s in bond_pairs(n, boundary):
        total += embed_site(op_a, r, n).matrix @ embed_site(op_b, s, n).matrix
    return total


def build_battery_xyz(spec: BatterySpec) -> Operator:
    """XYZ chain with transverse field:

    H = (J/4) sum [(1+gamma) XX + (1-gamma) YY] + (delta/4) sum ZZ
        + (h/2) sum Z.
    """
    n = spec.n_sites
    xx = _bond_sum("x", "x", n, spec.boundary)
    yy = _bond_sum("y", "y", n, spec.boundary)
    zz = _bond_sum("z", "z", n, spec.boundary)
    z = _field_sum("z", n)
    h_mat = (
        0.25 * spec.J * ((1.0 + spec.gamma) * xx + (1.0 - spec.gamma) * yy)
        + 0.25 * spec.delta * zz
        + 0.5 * spec.h * z
    )
    return Operator(h_mat, n_sites=n, hermitian=True)


def build_noninteracting_battery(n: int) -> Operator:
    """Sum of single-site sigma^x terms."""
    if n < 1 or n > max_sites():
        raise ValueError(f"n={n} outside the allowed range [1, {max_sites()}]")
    return Operator(_field_sum("x", n), n_sites=n, hermitian=True)


def normalize_spectrum(h: Operator) -> Operator:
    """Affine rescale so the spectrum spans exactly [-1, 1]."""
    if not h.hermitian:
        raise ValueError("normalize_spectrum requires a Hermitian operator")
    dec = hermitian_eig(h, compute_vectors=False)
    e_min = float(dec.values[0])
    e_max = float(dec.values[-1])
    span = e_max - e_min
    if span <= 1e-12 * max(1.0, abs(e_max), abs(e_min)):
        raise DegenerateSpectrumError(
            f"spectrum span {span:.3e} too small to normalize (H proportional to I)"
        )
    ident = np.eye(h.dim, dtype=complex)
    scaled = (2.0 * h.matrix - (e_max + e_min) * ident) / span
    return Operator(scaled, n_sites=h.n_sites, hermitian=True)


def build_pt_charger(alpha: float, n: int) -> Operator:
    """Local PT-symmetric charger: sum over sites of sigma^x + i sin(alpha) sigma^z.

    alpha = pi/2 is the exceptional point where the per-site term becomes
    defective.
    """
    if n < 1 or n > max_sites():
        raise ValueError(f"n={n} outside the allowed range [1, {max_sites()}]")
    s = math.sin(alpha)
    h_mat = _field_sum("x", n) + (1j * s) * _field_sum("z", n)
    return Operator(h_mat, n_sites=n, hermitian=(s == 0.0))


def build_pt_hermitian_charger(alpha: float, n: int) -> Operator:
    """Hermitian counterpart of the PT charger: sigma^x + sin(alpha) sigma^z per site."""
    if n < 1 or n > max_sites():
        raise ValueError(f"n={n} outside the allowed range [1, {max_sites()}]")
    s = math.sin(alpha)
    h_mat = _field_sum("x", n) + s * _field_sum("z", n)
    return Operator(h_mat, n_sites=n, hermitian=True)


def build_rt_charger(spec: ChargerSpec) -> Operator:
    """XY ring charger with imaginary (RT) or real (Hermitian) anisotropy.

    RT:           (J/4) sum [(1+i gamma') XX + (1-i gamma') YY] + (h'/2) sum Z
    RT-Hermitian: the gamma -> -i gamma' substitution, i.e. the standard XY
                  model with real anisotropy gamma'.
    """
    if spec.kind not in (RT, RT_HERMITIAN):
        raise ValueError(f"build_rt_charger expects an RT spec, got {spec.kind!r}")
    n = spec.n_sites
    xx = _bond_sum("x", "x", n, "periodic")
    yy = _bond_sum("y", "y", n, "periodic")
    z = _field_sum("z", n)
    aniso = 1j * spec.gamma_prime if spec.kind == RT else spec.gamma_prime
    h_mat = 0.25 * spec.J * ((1.0 + aniso) * xx + (1.0 - aniso) * yy) + 0.5 * spec.h_prime * z
    hermitian = spec.kind == RT_HERMITIAN or spec.gamma_prime == 0.0
    return Operator(h_mat, n_sites=n, hermitian=hermitian)


def build_charger(spec: ChargerSpec) -> Operator:
    """Build the charger Hamiltonian for any charger kind."""
    if spec.kind == PT:
        return build_pt_charger(spec.alpha, spec.n_sites)
    if spec.kind == PT_HERMITIAN:
        return build_pt_hermitian_charger(spec.alpha, spec.n_sites)
    return build_rt_charger(spec)


def _parity_conjugator(n: int) -> np.ndarray:
    """Sitewise sigma^x parity, the conjugation partner of the PT check."""
    s = pauli("x").matrix
    total = s
    for _ in range(n - 1):
        total = np.kron(total, s)
    return total


def _rotation_conjugator(n: int) -> np.ndarray:
    """exp(-i (pi/4) sum sigma^z): diagonal pi/2 spin rotation about z."""
    site = np.diag(np.exp(-1j * np.pi / 4.0 * np.array([1.0, -1.0])))
    total = site
    for _ in range(n - 1):
        total = np.kron(total, site)
    return total


def check_antilinear_symmetry(h: Operator, kind: str) -> float:
    """Relative residual of S conj(H) S^-1 - H for the PT or RT conjugation."""
    if kind.lower() == "pt":
        s = _parity_conjugator(h.n_sites)
        s_inv = s  # sitewise sigma^x is its own inverse
    elif kind.lower() == "rt":
        s = _rotation_conjugator(h.n_sites)
        s_inv = s.conj()  # unitary diagonal
    else:
        raise ValueError(f"unknown symmetry kind {kind!r}")
    transformed = s @ np.conj(h.matrix) @ s_inv
    num = float(np.sqrt(np.sum(np.abs(transformed - h.matrix) ** 2)))
    den = float(np.sqrt(np.sum(np.abs(h.matrix) ** 2)))
    return num / max(den, 1e-300)


def classify_phase(h: Operator) -> str:
    """'unbroken_real' when the full spectrum is real to tolerance, else
    'broken_complex'."""
    vals = general_eigenvalues(h)
    max_im = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    max_mod = float(np.max(np.abs(vals))) if vals.size else 0.0
    if max_im < REAL_SPECTRUM_TOL * max(1.0, max_mod):
        return UNBROKEN_REAL
    return BROKEN_COMPLEX
