import numpy as np
import pytest

from ptdimer.linalg import (
    SingularMatrixError,
    eig2x2,
    eigvecs2x2,
    expm,
    hermiticity_defect,
    kron,
    solve_linear,
)

TWO_PI = 2 * np.pi
GAMMA = TWO_PI * 17e6


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_elementwise_definition(self):
        sm = np.array([[0, 0], [1, 0]], dtype=complex)
        out = kron(sm, np.eye(2))
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        assert out[i * 2 + k, j * 2 + l] == sm[i, j] * np.eye(2)[k, l]

    def test_associative(self):
        rng = np.random.default_rng(7)
        a, b, c = (random_complex(rng, (2, 2)) for _ in range(3))
        np.testing.assert_allclose(kron(a, kron(b, c)), kron(kron(a, b), c), atol=1e-12)

    def test_distributes_over_addition(self):
        rng = np.random.default_rng(8)
        a, b, c = (random_complex(rng, (3, 3)) for _ in range(3))
        np.testing.assert_allclose(kron(a, b + c), kron(a, b) + kron(a, c), atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            kron(np.zeros((0, 0)), np.eye(2))


class TestExpm:
    def test_zero(self):
        np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        z1, z2 = 0.3 - 2.0j, -1.0 + 0.5j
        out = expm(np.diag([z1, z2]))
        np.testing.assert_allclose(np.diag(out), [np.exp(z1), np.exp(z2)], rtol=1e-14)

    def test_dimer_vs_eigendecomposition(self):
        # exp(-i H t) for the single-excitation dimer against direct
        # reconstruction from numpy's eigendecomposition
        g = GAMMA / 2  # g_tilde = 2, diagonalizable
        h = np.array([[0, g], [g, -0.5j * GAMMA]])
        t = 150e-9
        w, v = np.linalg.eig(-1j * h * t)
        ref = v @ np.diag(np.exp(w)) @ np.linalg.inv(v)
        np.testing.assert_allclose(expm(-1j * h * t), ref, atol=1e-10)

    def test_inverse_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            a = random_complex(rng, (6, 6))
            a *= 10.0 / np.linalg.norm(a)
            np.testing.assert_allclose(expm(a) @ expm(-a), np.eye(6), atol=1e-10)

    def test_nonsquare_rejected(self):
        with pytest.raises(ValueError):
            expm(np.zeros((2, 3)))


class TestEig2x2:
    def test_ep_double_root(self):
        g = GAMMA / 4
        h = np.array([[0, g], [g, -0.5j * GAMMA]])
        l1, l2 = eig2x2(h)
        assert abs(l1 - l2) < 1e-10 * GAMMA
        assert abs(l1 - (-0.25j * GAMMA)) < 1e-10 * GAMMA

    def test_diagonal(self):
        h = np.diag([0.0, -0.5j * GAMMA])
        l1, l2 = eig2x2(h)
        assert l1 == 0.0
        assert l2 == -0.5j * GAMMA

    def test_above_ep_against_companion_oracle(self):
        # g_tilde = 2 -> roots 2pi*(+-7.361 MHz) - i 2pi*4.25 MHz
        g = GAMMA / 2
        h = np.array([[0, g], [g, -0.5j * GAMMA]])
        l1, l2 = eig2x2(h)
        oracle = np.linalg.eigvals(h)
        oracle = sorted(oracle, key=lambda z: (z.imag, z.real), reverse=True)
        np.testing.assert_allclose([l1, l2], oracle, rtol=1e-12)
        np.testing.assert_allclose(l1.real, TWO_PI * 7.3612e6, rtol=1e-4)
        np.testing.assert_allclose(l1.imag, -TWO_PI * 4.25e6, rtol=1e-12)
        np.testing.assert_allclose(l2.real, -TWO_PI * 7.3612e6, rtol=1e-4)

    def test_below_ep_real_part_exactly_zero(self):
        for gt in (0.1, 0.5, 0.9):
            h = np.array([[0, gt * GAMMA / 4], [gt * GAMMA / 4, -0.5j * GAMMA]])
            l1, l2 = eig2x2(h)
            assert l1.real == 0.0 and l2.real == 0.0

    def test_characteristic_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            h = random_complex(rng, (2, 2))
            tr = h[0, 0] + h[1, 1]
            det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
            bound = 1e-12 * max(abs(tr) ** 2, abs(det))
            for lam in eig2x2(h):
                assert abs(lam * lam - tr * lam + det) <= max(bound, 1e-300)

    def test_eigvecs_coalesce_at_ep(self):
        g = GAMMA / 4
        h = np.array([[0, g], [g, -0.5j * GAMMA]])
        v = eigvecs2x2(h)
        gram = np.abs(np.linalg.det(v.conj().T @ v))
        assert gram < 1e-6


class TestSolveLinear:
    def test_identity(self):
        b = np.array([1.0, 2.0, 3.0 + 1j])
        np.testing.assert_array_equal(solve_linear(np.eye(3), b), b)

    def test_diagonal(self):
        a = np.diag([2.0, 4.0j])
        x = solve_linear(a, np.array([2.0, 4.0j]))
        np.testing.assert_allclose(x, [1.0, 1.0], rtol=1e-14)

    def test_random_64_residual(self):
        rng = np.random.default_rng(5)
        a = random_complex(rng, (64, 64)) + 10.0 * np.eye(64)
        b = random_complex(rng, 64)
        x = solve_linear(a, b)
        assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-10

    def test_singular_raises(self):
        a = np.ones((3, 3), dtype=complex)
        with pytest.raises(SingularMatrixError):
            solve_linear(a, np.array([1.0, 0.0, 0.0]))


def test_hermiticity_defect():
    h = np.array([[1.0, 2.0 + 1j], [2.0 - 1j, -1.0]])
    assert hermiticity_defect(h) == 0.0
    assert hermiticity_defect(h + np.array([[0, 1e-3], [0, 0]])) == pytest.approx(1e-3)
