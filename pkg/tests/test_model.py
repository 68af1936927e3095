import numpy as np
import pytest

from ptdimer.coupler import CouplerMap
from ptdimer.linalg import eig2x2, hermiticity_defect
from ptdimer.model import (
    TWO_PI,
    DimerParams,
    DriveParams,
    ThreeModeParams,
    dimer_eigenvalues,
    dimer_hamiltonian_1exc,
    dimer_hamiltonian_full,
    driven_hamiltonian,
    lowering_op,
    observables,
    pauli_x_op,
    psi_q1_excited,
    psi_q1_superposition,
    raising_op,
    three_mode_hamiltonian,
    three_mode_hamiltonian_lab,
)

GAMMA = TWO_PI * 17e6


class TestParams:
    def test_dimer_derived_quantities(self):
        p = DimerParams.from_g_tilde(1.0)
        assert p.g == pytest.approx(p.gamma / 4)
        assert p.g_tilde == pytest.approx(1.0)
        assert p.Gamma == 0.0

    def test_gamma_regimes(self):
        below = DimerParams.from_g_tilde(0.5)
        above = DimerParams.from_g_tilde(1.5)
        assert below.Gamma.imag == 0.0 and below.Gamma.real > 0.0
        assert above.Gamma.real == 0.0 and above.Gamma.imag > 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            DimerParams(gamma=-1.0, g=0.0)
        with pytest.raises(ValueError):
            DimerParams(gamma=1.0, g=-1.0)

    def test_three_mode_resonance_required(self):
        with pytest.raises(ValueError):
            ThreeModeParams(
                omega1=1.0, omega2=2.0, omega_c=3.0, omega_c_ref=3.0,
                g12=0.0, g1c_ref=0.0, g2c_ref=0.0, gamma=1.0,
            )

    def test_three_mode_validity_warning(self):
        with pytest.warns(UserWarning):
            ThreeModeParams.from_hz(omega_c_hz=5.2e9)  # g1c/|delta| = 0.56


class TestLoweringOp:
    def test_single_site(self):
        out = lowering_op(0, 1)
        # basis {|e>, |g>}: sigma_minus maps |e> -> |g>
        np.testing.assert_array_equal(out, [[0, 0], [1, 0]])

    def test_anticommutator_is_identity(self):
        sm = lowering_op(0, 2)
        sp = raising_op(0, 2)
        np.testing.assert_array_equal(sm @ sp + sp @ sm, np.eye(4))

    def test_distinct_sites_commute(self):
        a = lowering_op(0, 3)
        b = lowering_op(1, 3)
        np.testing.assert_array_equal(a @ b, b @ a)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            lowering_op(2, 2)


class TestDimerHamiltonian:
    def test_full_literal_matrix(self):
        p = DimerParams.from_g_tilde(1.2)
        expected = np.array(
            [
                [-0.5j * p.gamma, 0, 0, 0],
                [0, 0, p.g, 0],
                [0, p.g, -0.5j * p.gamma, 0],
                [0, 0, 0, 0],
            ]
        )
        np.testing.assert_allclose(dimer_hamiltonian_full(p), expected, atol=1e-12)

    def test_g_zero_is_diagonal(self):
        p = DimerParams.from_hz(g_hz=0.0)
        np.testing.assert_allclose(
            dimer_hamiltonian_full(p),
            np.diag([-0.5j * p.gamma, 0, -0.5j * p.gamma, 0]),
            atol=1e-12,
        )

    def test_hermitian_antihermitian_split(self):
        p = DimerParams.from_g_tilde(0.7)
        h = dimer_hamiltonian_full(p)
        herm = 0.5 * (h + h.conj().T)
        anti = (h - h.conj().T) / 2j
        coupling = np.zeros((4, 4), complex)
        coupling[1, 2] = coupling[2, 1] = p.g
        np.testing.assert_allclose(herm, coupling, atol=1e-12)
        np.testing.assert_allclose(anti, -0.5 * p.gamma * np.diag([1, 0, 1, 0]), atol=1e-12)

    def test_1exc_is_central_block(self):
        p = DimerParams.from_g_tilde(0.8)
        full = dimer_hamiltonian_full(p)
        np.testing.assert_array_equal(dimer_hamiltonian_1exc(p), full[1:3, 1:3])

    def test_trace_is_g_independent(self):
        for gt in (0.0, 0.5, 2.0):
            p = DimerParams.from_g_tilde(gt)
            assert np.trace(dimer_hamiltonian_1exc(p)) == -0.5j * p.gamma

    def test_ep_degeneracy(self):
        p = DimerParams.from_g_tilde(1.0)
        l1, l2 = eig2x2(dimer_hamiltonian_1exc(p))
        assert abs(l1 - l2) < 1e-10 * p.gamma

    def test_eigenvalue_views(self):
        p = DimerParams.from_g_tilde(1.5)
        m1, m2 = dimer_eigenvalues(p)
        d1, d2 = dimer_eigenvalues(p, doubled=True)
        assert d1 == 2 * m1 and d2 == 2 * m2
        assert m1.imag == pytest.approx(-p.gamma / 4)
        assert d1.imag == pytest.approx(-p.gamma / 2)


class TestObservables:
    def test_m0_fixes_initial_state(self):
        m0, _ = observables()
        psi0 = psi_q1_excited()
        np.testing.assert_array_equal(m0 @ psi0, psi0)

    def test_m0_projector(self):
        m0, _ = observables()
        np.testing.assert_array_equal(m0 @ m0, m0)

    def test_m1_is_sigma2_minus(self):
        _, m1 = observables()
        expected = np.zeros((4, 4))
        expected[1, 0] = expected[3, 2] = 1.0  # positions (2,1) and (4,3), 1-based
        np.testing.assert_array_equal(m1, expected)
        np.testing.assert_array_equal(m1, lowering_op(1, 2))

    def test_superposition_state(self):
        psi1 = psi_q1_superposition()
        np.testing.assert_allclose(psi1, [0, 1 / np.sqrt(2), 0, 1 / np.sqrt(2)])


def excitation_number_op() -> np.ndarray:
    return sum(raising_op(k, 3) @ lowering_op(k, 3) for k in range(3))


class TestThreeMode:
    def test_decoupled_limit(self):
        p = ThreeModeParams.from_hz(g12_hz=0.0, g1c_ref_hz=0.0, g2c_ref_hz=0.0)
        h = three_mode_hamiltonian(p)
        delta_c = p.omega_c - p.omega
        expected = 0.5 * delta_c * np.kron(np.kron(np.eye(2), np.diag([1.0, -1.0])), np.eye(2))
        np.testing.assert_allclose(h, expected, atol=1e-6)

    def test_hermitian(self):
        p = ThreeModeParams.from_hz(omega_c_hz=6.5e9)
        assert hermiticity_defect(three_mode_hamiltonian(p)) == 0.0

    def test_conserves_excitation_number(self):
        p = ThreeModeParams.from_hz(omega_c_hz=6.0e9)
        h = three_mode_hamiltonian(p)
        n = excitation_number_op()
        np.testing.assert_allclose(h @ n - n @ h, np.zeros((8, 8)), atol=1e-6)

    def test_avoided_crossing_matches_effective_coupling(self):
        # splitting of the qubit-like eigenvalues of the lab-frame model
        # vs twice the effective-coupling formula, at 6.5 GHz
        cmap = CouplerMap(ThreeModeParams.from_hz())
        wc = TWO_PI * 6.5e9
        b1, b2 = cmap.idle_offsets()
        p = ThreeModeParams.from_hz(omega_c_hz=6.5e9)
        p = ThreeModeParams(
            omega1=p.omega1, omega2=p.omega2, omega_c=wc, omega_c_ref=p.omega_c_ref,
            g12=p.g12, g1c_ref=p.g1c_ref, g2c_ref=p.g2c_ref, gamma=p.gamma,
            q1_offset=b1, q2_offset=b2,
        )
        evals, evecs = np.linalg.eigh(three_mode_hamiltonian_lab(p))
        weight = np.abs(evecs[3, :]) ** 2 + np.abs(evecs[6, :]) ** 2  # |egg>, |gge>
        i, j = np.argsort(weight)[-2:]
        splitting = abs(evals[i] - evals[j])
        assert splitting == pytest.approx(2 * abs(cmap.g_eff(wc)), rel=0.05)

    def test_near_decoupled_idle(self):
        # minimum qubit-qubit splitting at the calibrated idle point
        cmap = CouplerMap(ThreeModeParams.from_hz(), counter_rotating=False)
        p = cmap.operating_params(0.0)
        evals, evecs = np.linalg.eigh(three_mode_hamiltonian(p))
        weight = np.abs(evecs[3, :]) ** 2 + np.abs(evecs[6, :]) ** 2
        i, j = np.argsort(weight)[-2:]
        assert abs(evals[i] - evals[j]) < TWO_PI * 0.3e6


class TestDrivenHamiltonian:
    def test_reduces_to_undriven(self):
        cmap = CouplerMap(ThreeModeParams.from_hz(), counter_rotating=False)
        p = cmap.operating_params(0.3 * p_gamma() / 4)
        d = DriveParams(omega_p=p.omega, delta_p=0.0, Omega_p=0.0)
        np.testing.assert_allclose(
            driven_hamiltonian(p, d), three_mode_hamiltonian(p), atol=1e-9
        )

    def test_hermitian_for_all_drives(self):
        p = ThreeModeParams.from_hz(omega_c_hz=6.2e9)
        d = DriveParams(omega_p=p.omega - 1e6, delta_p=1e6, Omega_p=2e5)
        assert hermiticity_defect(driven_hamiltonian(p, d)) == 0.0

    def test_drive_couples_q2_bit_flips(self):
        p = ThreeModeParams.from_hz(omega_c_hz=6.2e9)
        omega = 1e6
        h0 = driven_hamiltonian(p, DriveParams(omega_p=p.omega, delta_p=0.0, Omega_p=0.0))
        h1 = driven_hamiltonian(p, DriveParams(omega_p=p.omega, delta_p=0.0, Omega_p=omega))
        drive = h1 - h0
        np.testing.assert_allclose(drive, 0.5 * omega * pauli_x_op(2, 3), atol=1e-9)
        # exactly the 8 pairs differing in the Q2 (least significant) bit
        nz = {(i, j) for i, j in zip(*np.nonzero(drive))}
        assert nz == {(i, i ^ 1) for i in range(8)}


def p_gamma() -> float:
    return GAMMA
