import numpy as np
import pytest

from qbattery import closed_form_oracles as oracles
from qbattery.battery_dynamics import (
    delta_p_max,
    ergotropy,
    evolve_normalized,
    power_trace,
    work,
)
from qbattery.dense_linalg import expm_array, hermitian_eig
from qbattery.errors import ConsistencyError, NormalizationUnderflowError
from qbattery.model_builders import (
    PT,
    PT_HERMITIAN,
    RT,
    RT_HERMITIAN,
    BatterySpec,
    ChargerSpec,
    build_battery_xyz,
    build_charger,
    build_noninteracting_battery,
    build_pt_charger,
    build_pt_hermitian_charger,
    build_rt_charger,
    normalize_spectrum,
)
from qbattery.state_prep import QuantumState, ground_state, thermal_state
from qbattery.tensor_core import Operator


def xx_battery(j=1.0, h=1.0, n=2, boundary="periodic"):
    return normalize_spectrum(
        build_battery_xyz(
            BatterySpec(J=j, gamma=0.0, delta=0.0, h=h, n_sites=n, boundary=boundary)
        )
    )


def pt_pair(alpha, n=2):
    return (
        ChargerSpec(kind=PT, n_sites=n, alpha=alpha),
        ChargerSpec(kind=PT_HERMITIAN, n_sites=n, alpha=alpha),
    )


def rt_pair(gamma_prime, h_prime, n=2):
    return (
        ChargerSpec(kind=RT, n_sites=n, gamma_prime=gamma_prime, J=1.0, h_prime=h_prime),
        ChargerSpec(
            kind=RT_HERMITIAN, n_sites=n, gamma_prime=gamma_prime, J=1.0, h_prime=h_prime
        ),
    )


# --- evolve_normalized ---------------------------------------------------------


def test_evolve_time_zero_identity():
    psi = ground_state(xx_battery())
    out = evolve_normalized(build_pt_charger(np.pi / 3, 2), psi, 0.0)
    assert np.max(np.abs(out.data - psi.data)) < 1e-14


def test_evolve_hermitian_preserves_norm_before_renormalization():
    psi = ground_state(xx_battery())
    charger = build_pt_hermitian_charger(np.pi / 3, 2)
    k = expm_array(-1j * 2.5 * charger.matrix)
    phi = k @ psi.data
    assert abs(np.linalg.norm(phi) - 1.0) < 1e-10


def test_evolve_matches_two_site_closed_form_state():
    psi = ground_state(xx_battery())
    charger = build_pt_charger(np.pi / 3, 2)
    got = evolve_normalized(charger, psi, 1.0)
    want = oracles.pt_state_n2(np.pi / 3, 1.0)
    overlap = abs(np.vdot(want, got.data))
    assert abs(1.0 - overlap) < 1e-8


def test_evolve_density_matches_pure_projection():
    psi = ground_state(xx_battery())
    rho0 = QuantumState.density(np.outer(psi.data, psi.data.conj()))
    charger = build_pt_charger(np.pi / 3, 2)
    pure = evolve_normalized(charger, psi, 1.7)
    dens = evolve_normalized(charger, rho0, 1.7)
    proj = np.outer(pure.data, pure.data.conj())
    assert np.max(np.abs(dens.data - proj)) < 1e-12


def test_evolve_normalization_underflow():
    decaying = Operator(-5.0j * np.eye(2), n_sites=1)
    psi = QuantumState.pure(np.array([1.0, 0.0], dtype=complex))
    with pytest.raises(NormalizationUnderflowError):
        evolve_normalized(decaying, psi, 200.0)


# --- work -----------------------------------------------------------------------


def test_work_identical_states_is_zero():
    h = xx_battery()
    psi = ground_state(h)
    assert work(h, psi, psi) == 0.0


def test_work_ground_start_bounds():
    h = xx_battery()
    psi = ground_state(h)
    charger = build_pt_charger(np.pi / 3, 2)
    for t in (0.2, 0.9, 3.3, 8.0):
        w = work(h, psi, evolve_normalized(charger, psi, t))
        e_t = w - 1.0  # tr(H rho_t) for the normalized battery ground start
        assert -1.0 - 1e-12 <= e_t <= 1.0 + 1e-12
        assert -1e-12 <= w <= 2.0 + 1e-12


def test_work_matches_t_times_closed_form_power():
    h = xx_battery()
    psi = ground_state(h)
    charger = build_pt_charger(np.pi / 3, 2)
    t = 1.0
    w = work(h, psi, evolve_normalized(charger, psi, t))
    assert abs(w - t * oracles.pt_power_n2(t, 1.0, 1.0, np.pi / 3)) < 1e-8


def test_work_consistency_error_for_complex_expectation():
    bad = Operator(
        np.array([[0, 1], [1, 0]]) + 1j * np.array([[1, 0], [0, -1]]), n_sites=1
    )
    psi = QuantumState.pure(np.array([1.0, 0.0], dtype=complex))
    with pytest.raises(ConsistencyError):
        work(bad, psi, psi)


# --- power_trace ------------------------------------------------------------------


def test_power_trace_stationary_when_charger_equals_battery():
    h = xx_battery()
    psi = ground_state(h)
    trace = power_trace(h, h, psi, t_max=5.0, n_grid=64)
    assert np.max(np.abs(trace.work)) < 1e-10
    assert abs(trace.p_max) < 1e-9


def test_power_trace_alpha_zero_chargers_coincide():
    h = xx_battery()
    psi = ground_state(h)
    tr_pt = power_trace(h, build_pt_charger(0.0, 2), psi, t_max=8.0, n_grid=64)
    tr_he = power_trace(h, build_pt_hermitian_charger(0.0, 2), psi, t_max=8.0, n_grid=64)
    assert np.array_equal(tr_pt.power, tr_he.power)
    assert tr_pt.p_max == tr_he.p_max


def test_power_trace_exceptional_point_matches_closed_form_limit():
    # alpha -> pi/2 limit of the two-site power expression:
    # P(t) = [h (t^4 - (1-t)^4) + J t^2 (1-t)^2] / (h t (t^2 + (1-t)^2)^2) + 1/t
    def p_ep(ts, h, j):
        a = (1.0 - ts) ** 2
        b = ts**2
        return (h * (b**2 - a**2) + j * a * b) / (h * ts * (a + b) ** 2) + 1.0 / ts

    battery = xx_battery()
    psi = ground_state(battery)
    trace = power_trace(battery, build_pt_charger(np.pi / 2, 2), psi, 10.0, 2000)
    assert np.max(np.abs(trace.power - p_ep(trace.times, 1.0, 1.0))) < 1e-10
    dense = np.linspace(1e-5, 10.0, 100000)
    assert abs(trace.p_max - p_ep(dense, 1.0, 1.0).max()) < 1e-6


def test_power_trace_first_point_work_vanishes():
    battery = xx_battery()
    psi = ground_state(battery)
    trace = power_trace(battery, build_pt_charger(np.pi / 3, 2), psi, t_max=0.2, n_grid=2000)
    assert trace.times[0] == pytest.approx(1e-4)
    assert abs(trace.work[0]) <= 1e-6


def test_power_trace_alpha_reflection_symmetry():
    battery = xx_battery()
    psi = ground_state(battery)
    a = np.pi / 3
    tr1 = power_trace(battery, build_pt_charger(a, 2), psi, 6.0, 64)
    tr2 = power_trace(battery, build_pt_charger(np.pi - a, 2), psi, 6.0, 64)
    # pi - a is exact only up to rounding of pi, so allow float-level slack
    assert np.max(np.abs(tr1.power - tr2.power)) < 1e-10
    assert abs(tr1.p_max - tr2.p_max) < 1e-10


def test_power_trace_density_states_stay_physical():
    battery = xx_battery()
    rho0 = thermal_state(battery, beta=1.0)
    charger = build_pt_charger(np.pi / 3, 2)
    for t in (0.4, 1.9, 6.2):
        rho = evolve_normalized(charger, rho0, t)
        mat = rho.data
        assert np.max(np.abs(mat - mat.conj().T)) < 1e-10
        assert abs(np.trace(mat).real - 1.0) < 1e-10
        assert hermitian_eig(mat, compute_vectors=False).values[0] > -1e-9


def test_power_trace_pure_start_stays_pure():
    battery = xx_battery()
    psi = ground_state(battery)
    out = evolve_normalized(build_pt_charger(np.pi / 2, 2), psi, 3.0)
    assert out.is_pure
    rho = np.outer(out.data, out.data.conj())
    assert abs(np.trace(rho @ rho).real - 1.0) < 1e-10


def test_power_trace_input_validation():
    battery = xx_battery()
    psi = ground_state(battery)
    charger = build_pt_charger(0.3, 2)
    with pytest.raises(ValueError):
        power_trace(battery, charger, psi, t_max=0.0, n_grid=64)
    with pytest.raises(ValueError):
        power_trace(battery, charger, psi, t_max=1.0, n_grid=8)


# --- ergotropy ---------------------------------------------------------------------


def test_ergotropy_passive_states():
    battery = xx_battery()
    psi = ground_state(battery)
    assert abs(ergotropy(battery, psi)) < 1e-12
    mixed = QuantumState.density(np.eye(4, dtype=complex) / 4.0)
    assert abs(ergotropy(battery, mixed)) < 1e-12


def test_ergotropy_equals_work_for_pure_ground_starts():
    battery = xx_battery()
    psi = ground_state(battery)
    charger = build_pt_charger(np.pi / 3, 2)
    trace = power_trace(battery, charger, psi, t_max=10.0, n_grid=128)
    assert np.max(np.abs(trace.ergotropy - trace.work)) < 1e-10


def test_ergotropy_thermal_start_nonnegative_and_below_work_gain():
    battery = xx_battery()
    rho0 = thermal_state(battery, beta=2.0)
    charger = build_pt_charger(np.pi / 3, 2)
    rho_t = evolve_normalized(charger, rho0, 1.2)
    e = ergotropy(battery, rho_t)
    assert e >= -1e-10
    # mixed-state extractable energy never exceeds energy above the ground level
    energy = float(np.real(np.trace(battery.matrix @ rho_t.data)))
    assert e <= energy + 1.0 + 1e-10


# --- delta_p_max -----------------------------------------------------------------


def test_delta_zero_for_identical_chargers():
    nh, h = pt_pair(0.0)
    rec = delta_p_max(BatterySpec(J=1.0, gamma=0.0, delta=0.0, h=1.0, n_sites=2), nh, h, n_grid=64)
    assert rec.delta == 0.0
    assert rec.delta == rec.p_max_nonhermitian - rec.p_max_hermitian


@pytest.mark.parametrize("j", [-1.5, 0.0, 1.5])
def test_delta_positive_for_pt_charging(j):
    nh, h = pt_pair(np.pi / 3)
    rec = delta_p_max(
        BatterySpec(J=j, gamma=0.0, delta=0.0, h=1.0, n_sites=2), nh, h, n_grid=400
    )
    assert rec.delta > 0.0


def test_delta_rt_sign_flips_with_field():
    nh, h = rt_pair(0.5, 0.5)
    assert delta_p_max(2, nh, h, n_grid=400).delta > 0.0
    nh, h = rt_pair(0.5, 1.5)
    assert delta_p_max(2, nh, h, n_grid=400).delta < 0.0


def test_delta_requires_matching_sites():
    nh, h = pt_pair(0.3, n=3)
    with pytest.raises(ValueError):
        delta_p_max(BatterySpec(J=1.0, gamma=0.0, delta=0.0, h=1.0, n_sites=2), nh, h)


def test_delta_thermal_init_requires_beta():
    nh, h = pt_pair(0.3)
    with pytest.raises(ValueError):
        delta_p_max(
            BatterySpec(J=1.0, gamma=0.0, delta=0.0, h=1.0, n_sites=2),
            nh,
            h,
            init="thermal",
        )


# --- numeric pipeline vs closed forms over the parameter grids --------------------


@pytest.mark.parametrize("alpha", [np.pi / 6, np.pi / 3, 5 * np.pi / 12])
@pytest.mark.parametrize("j,h", [(1.0, 1.0), (-1.0, 1.0), (0.5, 1.0)])
def test_pt_power_oracle_equivalence(alpha, j, h):
    battery = xx_battery(j=j, h=h)
    psi = ground_state(battery)
    trace = power_trace(battery, build_pt_charger(alpha, 2), psi, 10.0, 128)
    for t, p in zip(trace.times, trace.power):
        assert abs(p - oracles.pt_power_n2(float(t), h, j, alpha)) < 1e-8


@pytest.mark.parametrize(
    "gamma_prime,h_prime",
    [(0.3, 0.5), (0.8, 0.5), (0.8, 0.2), (1.2, 0.5)],
)
def test_rt_power_oracle_equivalence(gamma_prime, h_prime):
    battery = normalize_spectrum(build_noninteracting_battery(2))
    psi = ground_state(battery)
    nh_spec, h_spec = rt_pair(gamma_prime, h_prime)
    trace = power_trace(battery, build_charger(nh_spec), psi, 10.0, 128)
    for t, p in zip(trace.times, trace.power):
        assert abs(p - oracles.rt_power_n2(float(t), gamma_prime, h_prime)) < 1e-8
    trace_h = power_trace(battery, build_charger(h_spec), psi, 10.0, 128)
    for t, p in zip(trace_h.times, trace_h.power):
        assert abs(p - oracles.rt_herm_power_n2(float(t), gamma_prime, h_prime)) < 1e-8
