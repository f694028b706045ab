from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavemix.model import STRONG_FIELD, WEAK_FIELD, SystemParams, coherences, FieldVector
from wavemix.oracle import (
    DensityMatrix,
    DriveSet,
    NoUniqueSteadyStateError,
    coherence_equations,
    hamiltonian_interaction,
    lindblad_rhs,
    liouvillian,
    sigma,
    steady_state,
    validate_perturbation,
)

RNG = np.random.default_rng(20240611)


def random_complex(rng, scale=1.0):
    return scale * complex(rng.normal(), rng.normal())


def random_drives(rng):
    return DriveSet(*(random_complex(rng) for _ in range(5)), delta_p=rng.normal())


def random_params(rng):
    r = rng.uniform(0, 1, 5)
    return SystemParams(gamma12=r[0], gamma13=0.1 + r[1], gamma23=r[2], gamma_phi2=r[3], gamma_phi3=r[4])


def random_matrix(rng, hermitian=True):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    return a + a.conj().T if hermitian else a


def test_hamiltonian_examples():
    assert np.all(hamiltonian_interaction(DriveSet()) == 0)
    h = hamiltonian_interaction(DriveSet(omega_p=0.1))
    expected = np.zeros((3, 3))
    expected[1, 0] = expected[0, 1] = -0.05
    np.testing.assert_array_equal(h, expected)
    np.testing.assert_array_equal(hamiltonian_interaction(DriveSet(delta_p=0.16)), np.diag([0, 0.16, 0.16]))


def test_hamiltonian_couplings_and_hermiticity():
    d = DriveSet(omega_p=0.1, omega_c=2j, omega_d=0.5, omega_f=0.3, omega_t=-1 + 1j, delta_p=0.2)
    h = hamiltonian_interaction(d)
    np.testing.assert_array_equal(h, h.conj().T)
    assert h[1, 0] == -0.5 * (0.1 + 0.3)
    assert h[2, 1] == -0.5 * (2j + 0.5)
    assert h[2, 0] == -0.5 * (-1 + 1j)


def test_ground_state_stationary():
    assert np.all(lindblad_rhs(WEAK_FIELD, DriveSet(), sigma(1, 1)) == 0)


def test_single_relaxation_channel():
    p = SystemParams(gamma12=0.01, gamma13=1, gamma23=0)
    out = lindblad_rhs(p, DriveSet(), sigma(2, 2))
    assert out[0, 0] == pytest.approx(0.01)
    assert out[1, 1] == pytest.approx(-0.01)
    assert np.count_nonzero(out) == 2


def test_decay_cascade_from_level3():
    out = lindblad_rhs(WEAK_FIELD, DriveSet(), sigma(3, 3))
    assert out[2, 2] == pytest.approx(-(1 + 0.005))
    assert out[1, 1] == pytest.approx(0.005)
    assert out[0, 0] == pytest.approx(1.0)


def test_dephasing_damps_coherence_only():
    p = SystemParams(gamma12=0, gamma23=0, gamma_phi2=0.4)
    rho = 0.5 * (sigma(1, 1) + sigma(2, 2) + sigma(1, 2) + sigma(2, 1))
    out = lindblad_rhs(p, DriveSet(), rho)
    assert out[1, 0] == pytest.approx(-0.2 * 0.5)
    assert out[0, 0] == 0 and out[1, 1] == 0


def test_liouvillian_matches_rhs():
    for _ in range(20):
        p, d, rho = random_params(RNG), random_drives(RNG), random_matrix(RNG, hermitian=False)
        vec = liouvillian(p, d) @ rho.ravel()
        np.testing.assert_allclose(vec.reshape(3, 3), lindblad_rhs(p, d, rho), atol=1e-12)


def test_coherence_equations_match_rhs_on_random_inputs():
    worst = 0.0
    for _ in range(100):
        p, d, rho = random_params(RNG), random_drives(RNG), random_matrix(RNG, hermitian=False)
        full = lindblad_rhs(p, d, rho)
        d21, d31, d32 = coherence_equations(p, d, rho)
        worst = max(worst, abs(full[1, 0] - d21), abs(full[2, 0] - d31), abs(full[2, 1] - d32))
    assert worst <= 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_trace_and_hermiticity_preserved(seed):
    rng = np.random.default_rng(seed)
    p, d, rho = random_params(rng), random_drives(rng), random_matrix(rng)
    out = lindblad_rhs(p, d, rho)
    assert abs(np.trace(out)) <= 1e-13 * max(1.0, np.abs(rho).max())
    assert np.abs(out - out.conj().T).max() <= 1e-13 * max(1.0, np.abs(rho).max())


def test_density_matrix_validation():
    DensityMatrix.ground()
    with pytest.raises(ValueError):
        DensityMatrix(sigma(1, 2))
    with pytest.raises(ValueError):
        DensityMatrix(2 * sigma(1, 1))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5, 0]))


def test_steady_state_without_drives_is_ground():
    rho = steady_state(WEAK_FIELD, DriveSet())
    np.testing.assert_allclose(rho.rho, sigma(1, 1), atol=1e-15)


def test_steady_state_weak_probe_matches_linear_response():
    rho = steady_state(WEAK_FIELD, DriveSet(omega_p=1e-3, omega_c=0.1))
    expected = 1j * 1e-3 * 0.5025 / (2 * 0.0050125)
    assert abs(rho[1, 0] - expected) / abs(expected) < 0.01


@pytest.mark.parametrize(
    "drives",
    [
        DriveSet(omega_p=1e-3, omega_c=0.1),
        DriveSet(omega_p=1e-3, omega_c=0.1, omega_d=0.1),
        DriveSet(omega_p=0.3, omega_c=8, omega_d=0.65, omega_f=0.1, omega_t=0.2j, delta_p=0.16),
        DriveSet(omega_p=2.0, omega_c=1.0, delta_p=-0.7),
    ],
)
def test_solver_paths_agree(drives):
    a = steady_state(WEAK_FIELD, drives, method="solve").rho
    b = steady_state(WEAK_FIELD, drives, method="integrate").rho
    assert np.abs(a - b).max() <= 1e-9
    assert np.abs(liouvillian(WEAK_FIELD, drives) @ a.ravel()).max() < 1e-12


def test_steady_state_positivity_on_random_drives():
    for _ in range(50):
        p, d = random_params(RNG), random_drives(RNG)
        rho = steady_state(p, d)
        assert np.linalg.eigvalsh(rho.rho).min() >= -1e-10


def test_degenerate_liouvillian_rejected():
    # nothing relaxes level |2>, so |1><1| and |2><2| are both stationary
    p = SystemParams(gamma12=0, gamma23=0)
    with pytest.raises(NoUniqueSteadyStateError):
        steady_state(p, DriveSet())
    with pytest.raises(NoUniqueSteadyStateError):
        steady_state(p, DriveSet(), method="integrate")


def test_unknown_method():
    with pytest.raises(ValueError):
        steady_state(WEAK_FIELD, DriveSet(), method="magic")


def test_validate_without_probe_class_drives():
    rep = validate_perturbation(WEAK_FIELD, DriveSet(omega_c=0.1, omega_d=0.1))
    for name in ("rho21", "rho31"):
        assert rep[name].oracle == 0 and rep[name].predicted == 0
        assert rep[name].abs_error == 0 and rep[name].rel_error == 0
    assert rep["rho32"].predicted is None


def test_validate_first_order_error_is_quadratic_in_probe():
    # Leading neglected effect is population transfer, of order |omega_p|^2,
    # so the relative error falls 100x per decade of probe amplitude.
    errs = [
        validate_perturbation(WEAK_FIELD, DriveSet(omega_p=a, omega_c=0.1))["rho21"].rel_error
        for a in (1e-3, 1e-4, 1e-5)
    ]
    assert errs[0] < 0.01
    assert errs[0] / errs[1] == pytest.approx(100, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(100, rel=0.05)


def test_validate_two_photon_coherence():
    rep = validate_perturbation(WEAK_FIELD, DriveSet(omega_p=1e-3, omega_c=0.1))
    assert rep["rho31"].predicted == pytest.approx(-1e-3 * 0.1 / (4 * 0.0050125))
    assert rep["rho31"].rel_error < 0.01


def test_validate_with_drive_field_reflects_lumped_pumps():
    # The master equation cannot tell the drive from the control (both sit on
    # the 2-3 transition), so the oracle dresses the probe with omega_c +
    # omega_d while the perturbative rho31 pairs the probe with omega_c only.
    d = DriveSet(omega_p=1e-3, omega_c=0.1, omega_d=0.1)
    rep = validate_perturbation(WEAK_FIELD, d)
    pump = 0.2
    lam_total = 0.005 * 0.5025 + pump**2 / 4
    lumped = -1e-3 * pump / (4 * lam_total)
    assert rep["rho31"].oracle == pytest.approx(lumped, rel=0.01)
    assert rep["rho31"].rel_error == pytest.approx(abs(lumped - rep["rho31"].predicted) / abs(rep["rho31"].predicted), rel=0.02)


def test_validate_uses_pumps_from_drives():
    d = DriveSet(omega_p=1e-4, omega_c=8.0, delta_p=0.16)
    rep = validate_perturbation(WEAK_FIELD, d)
    expected = coherences(replace(STRONG_FIELD, omega_d=0), FieldVector(1e-4)).rho21
    assert rep["rho21"].predicted == pytest.approx(expected)
    assert rep["rho21"].rel_error < 1e-3
