"""Figures of merit for the charged battery.

Evolution under a (possibly non-Hermitian) charger is the normalized map
``rho -> K rho K^dag / tr(K rho K^dag)`` with ``K = exp(-i H t)``; the work
stored at time t is measured against the battery Hamiltonian and the power is
``W(t)/t``.  Each sampled time uses the full propagator from t = 0 (never a
chained product of short steps), so snapshots carry no accumulated stepping
error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense_linalg import expm_array, hermitian_eig
from .errors import ConsistencyError, NormalizationUnderflowError
from .model_builders import (
    BatterySpec,
    ChargerSpec,
    build_battery_xyz,
    build_charger,
    build_noninteracting_battery,
    normalize_spectrum,
)
from .state_prep import QuantumState, ground_state, thermal_state
from .tensor_core import Operator

_IM_TOL = 1e-10
_TRACE_FLOOR = 1e-300
_REFINE_TOL = 1e-6
_CHUNK_ELEMS = 1 << 20

GOLDEN_INV = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_INV2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class PowerTrace:
    """Time series of work, power and ergotropy plus the located maximum."""

    times: np.ndarray
    work: np.ndarray
    power: np.ndarray
    ergotropy: np.ndarray
    t_star: float
    p_max: float


@dataclass(frozen=True)
class DeltaRecord:
    """Maximum-power difference between a non-Hermitian charger and its
    Hermitian counterpart on identical batteries and initial states."""

    params: dict
    p_max_nonhermitian: float
    p_max_hermitian: float
    delta: float


def _realize(value: complex, what: str) -> float:
    if abs(value.imag) > _IM_TOL:
        raise ConsistencyError(f"{what} has imaginary residue {value.imag:.3e}")
    return float(value.real)


def _realize_array(values: np.ndarray, what: str) -> np.ndarray:
    worst = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if worst > _IM_TOL:
        raise ConsistencyError(f"{what} has imaginary residue {worst:.3e}")
    return np.ascontiguousarray(values.real)


def _energy(h_mat: np.ndarray, state: QuantumState) -> float:
    if state.is_pure:
        v = state.data
        val = complex(v.conj() @ (h_mat @ v))
    else:
        val = complex(np.sum(h_mat * state.data.T))
    return _realize(val, "energy expectation")


def evolve_normalized(h_charge: Operator, rho0: QuantumState, t: float) -> QuantumState:
    """Propagate with exp(-i H t) and renormalize."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if rho0.dim != h_charge.dim:
        raise ValueError("state and charger dimensions differ")
    k = expm_array(-1j * t * h_charge.matrix)
    if rho0.is_pure:
        phi = k @ rho0.data
        nrm2 = float(np.real(phi.conj() @ phi))
        if nrm2 < _TRACE_FLOOR:
            raise NormalizationUnderflowError(
                f"evolved norm underflow at t={t} (unphysical parameters)"
            )
        return QuantumState.pure(phi / math.sqrt(nrm2))
    sig = k @ rho0.data @ k.conj().T
    tr = float(np.real(np.trace(sig)))
    if tr < _TRACE_FLOOR:
        raise NormalizationUnderflowError(
            f"evolved trace underflow at t={t} (unphysical parameters)"
        )
    sig = 0.5 * (sig + sig.conj().T) / tr
    return QuantumState.density(sig)


def work(h_b: Operator, rho0: QuantumState, rho_t: QuantumState) -> float:
    """Stored work tr[H_B (rho(t) - rho(0))]."""
    if not (h_b.dim == rho0.dim == rho_t.dim):
        raise ValueError("dimension mismatch between battery and states")
    return _energy(h_b.matrix, rho_t) - _energy(h_b.matrix, rho0)


def _passive_energy(battery_levels: np.ndarray, populations_desc: np.ndarray) -> float:
    return float(np.real(np.sum(populations_desc * battery_levels)))


def ergotropy(h_b: Operator, rho: QuantumState) -> float:
    """Extractable energy: tr(H_B rho) minus the passive-state energy.

    The passive energy pairs the state's populations (descending) with the
    battery levels (ascending); for a pure state the populations are
    (1, 0, ..., 0), so the passive energy is the ground energy.
    """
    if not h_b.hermitian:
        raise ValueError("ergotropy requires a Hermitian battery Hamiltonian")
    levels = hermitian_eig(h_b, compute_vectors=False).values
    energy = _energy(h_b.matrix, rho)
    if rho.is_pure:
        return energy - float(levels[0])
    pops = hermitian_eig(rho.data, compute_vectors=False).values[::-1]
    return energy - _passive_energy(levels, pops)


def _batch_propagators(h_mat: np.ndarray, times: np.ndarray) -> np.ndarray:
    from .dense_linalg import _expm_chunk

    stack = (-1j * times)[:, None, None] * h_mat[None, :, :]
    return _expm_chunk(stack)


def power_trace(
    h_b: Operator,
    h_charge: Operator,
    rho0: QuantumState,
    t_max: float = 10.0,
    n_grid: int = 2000,
) -> PowerTrace:
    """Work, power and ergotropy on a uniform grid over (0, t_max].

    The best grid point is refined by golden-section search in its bracketing
    interval; ties go to smaller t.  Every grid propagator is built
    independently from t = 0.
    """
    if t_max <= 0:
        raise ValueError(f"t_max must be > 0, got {t_max}")
    if n_grid < 16:
        raise ValueError(f"n_grid must be >= 16, got {n_grid}")
    if not (h_b.dim == h_charge.dim == rho0.dim):
        raise ValueError("battery, charger and state dimensions differ")
    h_mat = h_b.matrix
    d = h_b.dim
    times = t_max * np.arange(1, n_grid + 1) / n_grid
    levels = hermitian_eig(h_b, compute_vectors=False).values
    e_init = _energy(h_mat, rho0)

    work_vals = np.empty(n_grid)
    ergo_vals = np.empty(n_grid)
    chunk = max(1, _CHUNK_ELEMS // (d * d))
    for start in range(0, n_grid, chunk):
        sl = slice(start, min(start + chunk, n_grid))
        props = _batch_propagators(h_charge.matrix, times[sl])
        if rho0.is_pure:
            phi = np.einsum("kij,j->ki", props, rho0.data)
            nrm2 = np.real(np.einsum("ki,ki->k", phi.conj(), phi))
            if np.min(nrm2) < _TRACE_FLOOR:
                raise NormalizationUnderflowError("evolved norm underflow on grid")
            phi /= np.sqrt(nrm2)[:, None]
            expect = _realize_array(
                np.einsum("ki,ki->k", phi.conj(), phi @ h_mat.T),
                "work expectation",
            )
            work_vals[sl] = expect - e_init
            ergo_vals[sl] = expect - levels[0]
        else:
            sig = props @ rho0.data @ props.conj().transpose(0, 2, 1)
            traces = np.real(np.einsum("kii->k", sig))
            if np.min(traces) < _TRACE_FLOOR:
                raise NormalizationUnderflowError("evolved trace underflow on grid")
            sig /= traces[:, None, None]
            sig = 0.5 * (sig + sig.conj().transpose(0, 2, 1))
            expect = _realize_array(
                np.einsum("kij,ji->k", sig, h_mat), "work expectation"
            )
            work_vals[sl] = expect - e_init
            for i in range(sig.shape[0]):
                pops = hermitian_eig(sig[i], compute_vectors=False).values[::-1]
                ergo_vals[sl.start + i] = expect[i] - _passive_energy(levels, pops)

    power_vals = work_vals / times
    k_star = int(np.argmax(power_vals))
    p_grid = float(power_vals[k_star])
    t_grid = float(times[k_star])

    def power_at(t: float) -> float:
        state = evolve_normalized(h_charge, rho0, t)
        return (_energy(h_mat, state) - e_init) / t

    lo = float(times[k_star - 1]) if k_star >= 1 else min(1e-12, 0.5 * t_grid)
    hi = float(times[k_star + 1]) if k_star + 1 < n_grid else float(t_max)
    t_ref, p_ref = _golden_max(power_at, lo, hi)

    if p_ref > p_grid or (p_ref == p_grid and t_ref < t_grid):
        t_star, p_max = t_ref, p_ref
    else:
        t_star, p_max = t_grid, p_grid
    return PowerTrace(
        times=times,
        work=work_vals,
        power=power_vals,
        ergotropy=ergo_vals,
        t_star=t_star,
        p_max=p_max,
    )


def _golden_max(f, a: float, b: float) -> tuple[float, float]:
    """Golden-section maximization on [a, b] to width < 1e-6; ties keep the
    left (smaller-t) subinterval."""
    x1 = a + GOLDEN_INV2 * (b - a)
    x2 = a + GOLDEN_INV * (b - a)
    f1 = f(x1)
    f2 = f(x2)
    while b - a > _REFINE_TOL:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = a + GOLDEN_INV2 * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN_INV * (b - a)
            f2 = f(x2)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def _build_battery(battery) -> Operator:
    if isinstance(battery, BatterySpec):
        return build_battery_xyz(battery)
    if isinstance(battery, int):
        return build_noninteracting_battery(battery)
    if isinstance(battery, Operator):
        return battery
    raise TypeError(f"battery must be a BatterySpec, an int, or an Operator, got {type(battery)}")


def delta_p_max(
    battery,
    nonhermitian: ChargerSpec,
    hermitian: ChargerSpec,
    init: str = "ground",
    beta: float | None = None,
    t_max: float = 10.0,
    n_grid: int = 2000,
    degeneracy_tol: float = 1e-9,
) -> DeltaRecord:
    """P_max difference between a non-Hermitian charger and its Hermitian
    counterpart for a shared battery and initial state."""
    h_b = normalize_spectrum(_build_battery(battery))
    if nonhermitian.n_sites != h_b.n_sites or hermitian.n_sites != h_b.n_sites:
        raise ValueError("chargers must share n_sites with the battery")
    if init == "ground":
        rho0 = ground_state(h_b, degeneracy_tol)
    elif init == "thermal":
        if beta is None:
            raise ValueError("thermal init requires beta")
        rho0 = thermal_state(h_b, beta)
    else:
        raise ValueError(f"unknown init {init!r}")
    trace_nh = power_trace(h_b, build_charger(nonhermitian), rho0, t_max, n_grid)
    trace_h = power_trace(h_b, build_charger(hermitian), rho0, t_max, n_grid)
    params = {
        "battery": battery,
        "nonhermitian": nonhermitian,
        "hermitian": hermitian,
        "init": init,
        "beta": beta,
        "t_max": t_max,
        "n_grid": n_grid,
    }
    return DeltaRecord(
        params=params,
        p_max_nonhermitian=trace_nh.p_max,
        p_max_hermitian=trace_h.p_max,
        delta=trace_nh.p_max - trace_h.p_max,
    )
