import numpy as np
import pytest

from qbattery.dense_linalg import general_eigenvalues, hermitian_eig, is_defective_at
from qbattery.errors import DegenerateSpectrumError
from qbattery.model_builders import (
    BROKEN_COMPLEX,
    PT,
    PT_HERMITIAN,
    RT,
    RT_HERMITIAN,
    UNBROKEN_REAL,
    BatterySpec,
    ChargerSpec,
    build_battery_xyz,
    build_charger,
    build_noninteracting_battery,
    build_pt_charger,
    build_pt_hermitian_charger,
    build_rt_charger,
    check_antilinear_symmetry,
    classify_phase,
    normalize_spectrum,
)
from qbattery.tensor_core import Operator, embed_site, pauli

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def xx_spec(j=1.0, h=1.0, n=2, **kw):
    return BatterySpec(J=j, gamma=0.0, delta=0.0, h=h, n_sites=n, **kw)


# --- batteries ----------------------------------------------------------------


def test_battery_pure_field_term():
    h = build_battery_xyz(BatterySpec(J=0.0, gamma=0.0, delta=0.0, h=1.0, n_sites=2))
    assert np.array_equal(h.matrix, np.diag([1.0, 0.0, 0.0, -1.0]).astype(complex))


def test_battery_xx_spectrum():
    h = build_battery_xyz(xx_spec())
    vals = hermitian_eig(h, compute_vectors=False).values
    assert np.allclose(vals, [-1.0, -0.5, 0.5, 1.0], atol=1e-13)
    assert h.hermitian


def test_battery_ising_like_hand_expansion():
    # J=1, gamma=1, h=0: H = (1/2) sx (x) sx
    h = build_battery_xyz(BatterySpec(J=1.0, gamma=1.0, delta=0.0, h=0.0, n_sites=2))
    assert np.max(np.abs(h.matrix - 0.5 * np.kron(SX, SX))) < 1e-15


def test_battery_zz_coupling_hand_expansion():
    h = build_battery_xyz(BatterySpec(J=0.0, gamma=0.0, delta=2.0, h=0.0, n_sites=2))
    assert np.array_equal(h.matrix, 0.5 * np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex))


def test_battery_spec_validation():
    with pytest.raises(ValueError):
        BatterySpec(J=1.0, gamma=0.0, delta=0.0, h=1.0, n_sites=1)
    with pytest.raises(ValueError):
        BatterySpec(J=np.inf, gamma=0.0, delta=0.0, h=1.0, n_sites=2)
    with pytest.raises(ValueError):
        xx_spec(boundary="twisted")


def test_noninteracting_battery():
    assert np.array_equal(build_noninteracting_battery(1).matrix, SX)
    h2 = build_noninteracting_battery(2)
    vals = hermitian_eig(h2, compute_vectors=False).values
    assert np.allclose(vals, [-2.0, 0.0, 0.0, 2.0], atol=1e-13)
    norm = normalize_spectrum(h2)
    vals = hermitian_eig(norm, compute_vectors=False).values
    assert np.allclose(vals, [-1.0, 0.0, 0.0, 1.0], atol=1e-12)


# --- spectrum normalization -----------------------------------------------------


def test_normalize_affine_cases():
    two_sz = Operator(2.0 * SZ, n_sites=1, hermitian=True)
    assert np.max(np.abs(normalize_spectrum(two_sz).matrix - SZ)) < 1e-12
    shifted = Operator(SZ + 5.0 * np.eye(2), n_sites=1, hermitian=True)
    assert np.max(np.abs(normalize_spectrum(shifted).matrix - SZ)) < 1e-12


def test_normalize_idempotent_and_endpoints():
    h = normalize_spectrum(build_battery_xyz(xx_spec(j=0.7, h=1.3)))
    again = normalize_spectrum(h)
    assert np.max(np.abs(again.matrix - h.matrix)) < 1e-10
    vals = hermitian_eig(h, compute_vectors=False).values
    assert abs(vals[0] + 1.0) < 1e-10 and abs(vals[-1] - 1.0) < 1e-10


@pytest.mark.parametrize(
    "spec",
    [
        xx_spec(j=1.0, h=1.0),
        xx_spec(j=-1.5, h=1.0, n=3),
        BatterySpec(J=1.0, gamma=0.6, delta=-0.4, h=0.8, n_sites=3),
    ],
)
def test_normalized_spectrum_spans_unit_interval(spec):
    vals = hermitian_eig(
        normalize_spectrum(build_battery_xyz(spec)), compute_vectors=False
    ).values
    assert vals[0] > -1.0 - 1e-10 and vals[-1] < 1.0 + 1e-10
    assert abs(vals[0] + 1.0) < 1e-10 and abs(vals[-1] - 1.0) < 1e-10


def test_normalize_degenerate_spectrum_error():
    ident = Operator(np.eye(4, dtype=complex), n_sites=2, hermitian=True)
    with pytest.raises(DegenerateSpectrumError):
        normalize_spectrum(ident)


# --- chargers -------------------------------------------------------------------


def test_pt_charger_hermitian_limit():
    assert np.array_equal(build_pt_charger(0.0, 1).matrix, SX)
    assert build_pt_charger(0.0, 1).hermitian
    assert not build_pt_charger(np.pi / 3, 1).hermitian


def test_pt_charger_single_site_eigenvalues():
    vals = general_eigenvalues(build_pt_charger(np.pi / 3, 1))
    assert np.allclose(sorted(vals.real), [-0.5, 0.5], atol=1e-10)
    assert np.max(np.abs(vals.imag)) < 1e-10


def test_pt_charger_exceptional_point_defective():
    assert is_defective_at(build_pt_charger(np.pi / 2, 1), 1e-6)


def test_pt_charger_reflection_symmetry():
    a = np.pi / 3
    h1 = build_pt_charger(a, 2).matrix
    h2 = build_pt_charger(np.pi - a, 2).matrix
    assert np.max(np.abs(h1 - h2)) < 1e-15


def test_pt_hermitian_charger():
    assert np.array_equal(
        build_pt_hermitian_charger(0.0, 2).matrix, build_pt_charger(0.0, 2).matrix
    )
    vals = hermitian_eig(build_pt_hermitian_charger(np.pi / 2, 1)).values
    assert np.allclose(vals, [-np.sqrt(2), np.sqrt(2)], atol=1e-12)
    h = build_pt_hermitian_charger(np.pi / 3, 2).matrix
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_rt_charger_hand_expansion():
    spec = ChargerSpec(kind=RT, n_sites=2, gamma_prime=0.8, J=1.0, h_prime=0.5)
    h = build_rt_charger(spec).matrix
    want = np.array(
        [
            [0.5, 0, 0, 0.4j],
            [0, 0, 0.5, 0],
            [0, 0.5, 0, 0],
            [0.4j, 0, 0, -0.5],
        ],
        dtype=complex,
    )
    assert np.max(np.abs(h - want)) < 1e-15
    assert np.max(np.abs(h - h.conj().T)) > 0.1  # genuinely non-Hermitian


def test_rt_hermitian_charger_flag_and_matrix():
    spec = ChargerSpec(kind=RT_HERMITIAN, n_sites=2, gamma_prime=0.8, J=1.0, h_prime=0.5)
    op = build_rt_charger(spec)
    assert op.hermitian
    assert np.max(np.abs(op.matrix - op.matrix.conj().T)) < 1e-15


def test_rt_gamma_zero_coincides():
    a = build_rt_charger(ChargerSpec(kind=RT, n_sites=2, gamma_prime=0.0, J=1.0, h_prime=0.5))
    b = build_rt_charger(
        ChargerSpec(kind=RT_HERMITIAN, n_sites=2, gamma_prime=0.0, J=1.0, h_prime=0.5)
    )
    assert np.array_equal(a.matrix, b.matrix)


def test_rt_conjugation_relation():
    plus = build_rt_charger(ChargerSpec(kind=RT, n_sites=3, gamma_prime=0.6, J=1.0, h_prime=0.7))
    minus = build_rt_charger(ChargerSpec(kind=RT, n_sites=3, gamma_prime=-0.6, J=1.0, h_prime=0.7))
    assert np.array_equal(minus.matrix, np.conj(plus.matrix))


def test_charger_spec_validation():
    with pytest.raises(ValueError):
        ChargerSpec(kind="weird", n_sites=2, alpha=0.1)
    with pytest.raises(ValueError):
        ChargerSpec(kind=PT, n_sites=2)  # missing alpha
    with pytest.raises(ValueError):
        ChargerSpec(kind=PT, n_sites=2, alpha=0.1, gamma_prime=0.5)
    with pytest.raises(ValueError):
        ChargerSpec(kind=RT, n_sites=2, gamma_prime=0.5, J=1.0)  # missing h_prime
    with pytest.raises(ValueError):
        ChargerSpec(kind=RT, n_sites=1, gamma_prime=0.5, J=1.0, h_prime=0.5)


def test_build_charger_dispatch():
    pt = build_charger(ChargerSpec(kind=PT, n_sites=2, alpha=0.3))
    assert np.array_equal(pt.matrix, build_pt_charger(0.3, 2).matrix)
    pth = build_charger(ChargerSpec(kind=PT_HERMITIAN, n_sites=2, alpha=0.3))
    assert pth.hermitian


# --- symmetry checks and phase classification -----------------------------------


def test_pt_symmetry_residual():
    assert check_antilinear_symmetry(build_pt_charger(np.pi / 3, 2), "pt") < 1e-10
    assert check_antilinear_symmetry(build_pt_charger(np.pi / 2, 3), "pt") < 1e-10


def test_rt_symmetry_residual():
    spec = ChargerSpec(kind=RT, n_sites=2, gamma_prime=0.8, J=1.0, h_prime=1.0)
    assert check_antilinear_symmetry(build_rt_charger(spec), "rt") < 1e-10


def test_symmetry_absent_for_plain_sz():
    op = embed_site(pauli("z"), 0, 1)
    assert check_antilinear_symmetry(op, "pt") > 1.0


def test_classify_phase():
    assert classify_phase(build_pt_hermitian_charger(0.4, 2)) == UNBROKEN_REAL
    assert classify_phase(build_pt_charger(np.pi / 3, 2)) == UNBROKEN_REAL
    # two-site RT spectral-reality boundary sits at h' = gamma'/2 for J=1
    g = 0.8
    above = ChargerSpec(kind=RT, n_sites=2, gamma_prime=g, J=1.0, h_prime=0.45)
    below = ChargerSpec(kind=RT, n_sites=2, gamma_prime=g, J=1.0, h_prime=0.35)
    assert classify_phase(build_rt_charger(above)) == UNBROKEN_REAL
    assert classify_phase(build_rt_charger(below)) == BROKEN_COMPLEX
