import numpy as np
import pytest

from ptdimer.dynamics import q1_population_analytic
from ptdimer.model import TWO_PI, DimerParams
from ptdimer.signal import (
    butterworth_lowpass,
    d_dg,
    gaussian_smooth,
    sensitivity_cw,
    sensitivity_q1,
    sensitivity_q2,
    smoothing_widths,
)

GAMMA = TWO_PI * 17e6


class TestGaussianSmooth:
    def test_constant_preserved(self):
        y = np.full(40, 3.7)
        np.testing.assert_allclose(gaussian_smooth(y, 2.0), y, rtol=1e-12)

    def test_impulse_response_is_kernel(self):
        n = 41
        y = np.zeros(n)
        y[n // 2] = 1.0
        sigma = 2.5
        out = gaussian_smooth(y, sigma)
        x = np.arange(n) - n // 2
        kern = np.exp(-0.5 * (x / sigma) ** 2)
        kern /= kern.sum()
        np.testing.assert_allclose(out, kern, atol=1e-12)

    def test_white_noise_variance_reduction(self):
        # output variance of unit white noise ~ 1/(2 sqrt(pi) sigma)
        rng = np.random.default_rng(42)
        sigma = 2.0
        noise = rng.standard_normal((10_000, 64))
        sm = gaussian_smooth(noise.T, sigma).T
        mid = sm[:, 20:44]  # away from reflecting boundaries
        reduction = 1.0 / np.var(mid)
        assert reduction == pytest.approx(2.0 * np.sqrt(np.pi) * sigma, rel=0.05)

    def test_variable_widths(self):
        y = np.linspace(0.0, 1.0, 30) ** 2
        widths = smoothing_widths(np.linspace(0.05, 2.0, 30), c=1.0)
        out = gaussian_smooth(y, widths)
        assert out.shape == y.shape
        assert np.all(np.isfinite(out))

    def test_width_truncation(self):
        g = np.array([0.01, 0.1, 1.0, 10.0])
        np.testing.assert_allclose(smoothing_widths(g, c=1.0), [10.0, 10.0, 1.0, 0.5])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gaussian_smooth(np.array([]), 1.0)


class TestButterworth:
    DT = 1e-9

    def test_dc_unchanged(self):
        y = np.full(400, 0.8)
        np.testing.assert_allclose(butterworth_lowpass(y, self.DT, 80e6), y, atol=1e-9)

    def test_cutoff_amplitude_two_pass(self):
        # at the cutoff a forward-backward pass attenuates to |H|^2 = 1/2
        fc = 50e6
        t = np.arange(4000) * self.DT
        y = np.sin(2 * np.pi * fc * t)
        out = butterworth_lowpass(y, self.DT, fc)
        mid = slice(1000, 3000)
        ratio = np.max(np.abs(out[mid])) / np.max(np.abs(y[mid]))
        assert ratio == pytest.approx(0.5, rel=0.02)

    def test_stopband_attenuation(self):
        fc = 80e6
        t = np.arange(4000) * self.DT
        y = np.sin(2 * np.pi * 4 * fc * t)
        out = butterworth_lowpass(y, self.DT, fc, order=4)
        mid = slice(1000, 3000)
        attenuation_db = 20 * np.log10(np.max(np.abs(out[mid])))
        assert attenuation_db < -40.0

    def test_cutoff_above_nyquist_rejected(self):
        with pytest.raises(ValueError):
            butterworth_lowpass(np.zeros(100), self.DT, 600e6)


class TestDerivative:
    def test_linear_ramp(self):
        g = np.linspace(0.0, 2.0, 21)
        np.testing.assert_allclose(d_dg(3.0 * g + 1.0, g[1] - g[0]), 3.0, rtol=1e-12)

    def test_quadratic_exact_interior(self):
        g = np.linspace(0.0, 2.0, 21)
        out = d_dg(g**2, g[1] - g[0])
        np.testing.assert_allclose(out[1:-1], 2.0 * g[1:-1], rtol=1e-12)

    def test_against_analytic_derivative(self):
        # dP/dg~ at g~=0.8, t=100 ns via the chain rule through Gamma
        t = 100e-9
        h = 0.01
        g_grid = np.arange(0.7, 0.9001, h)
        p_vals = np.array([
            q1_population_analytic(t, DimerParams.from_g_tilde(gt)) for gt in g_grid
        ])
        idx = np.argmin(np.abs(g_grid - 0.8))
        numeric = d_dg(p_vals, h)[idx]

        gamma = GAMMA
        g = 0.8 * gamma / 4
        Gam = 2.0 * np.sqrt((gamma / 4) ** 2 - g**2)
        dGam_dgt = -(g * gamma) / Gam  # dG/dg * dg/dg~ with dg/dg~ = gamma/4
        x = Gam * t / 2
        amp = np.cosh(x) + (gamma / (2 * Gam)) * np.sinh(x)
        damp_dG = (
            (t / 2) * np.sinh(x)
            - (gamma / (2 * Gam**2)) * np.sinh(x)
            + (gamma / (2 * Gam)) * (t / 2) * np.cosh(x)
        )
        analytic = np.exp(-gamma * t / 2) * 2.0 * amp * damp_dG * dGam_dgt
        assert numeric == pytest.approx(analytic, rel=5e-4)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            d_dg(np.array([1.0, 2.0]), 0.1)


@pytest.fixture(scope="module")
def population_grid():
    g_tilde = np.arange(0.05, 2.0001, 0.05)
    times = np.arange(0.0, 300e-9 + 1e-15, 100e-9)
    pops = np.array([
        q1_population_analytic(times, DimerParams.from_g_tilde(gt)) for gt in g_tilde
    ])
    return g_tilde, times, pops


class TestSensitivityPipelines:
    def test_q1_scale_invariance(self, population_grid):
        g_tilde, times, pops = population_grid
        base = sensitivity_q1(pops, g_tilde, times, smoothing_c=1.5)
        assert np.all(base.eta >= 0.0)
        assert np.all(np.isfinite(base.eta))

    def test_q1_zero_time_column_harmless(self, population_grid):
        g_tilde, times, pops = population_grid
        curve = sensitivity_q1(pops, g_tilde, times, assignment_error=0.0)
        assert np.all(np.isfinite(curve.eta))

    def test_cw_sigma_halves_eta(self):
        g_tilde = np.linspace(0.05, 2.0, 40)
        detunings = np.linspace(-1.0, 1.0, 11)
        mags = np.outer(np.tanh(g_tilde), np.ones(11)) + 0.1 * detunings**2
        one = sensitivity_cw(mags, g_tilde, detunings, sigma=1.0)
        two = sensitivity_cw(mags, g_tilde, detunings, sigma=2.0)
        np.testing.assert_allclose(two.eta, 0.5 * one.eta, rtol=1e-12)

    def test_cw_flat_spectrum_zero(self):
        g_tilde = np.linspace(0.05, 2.0, 40)
        detunings = np.linspace(-1.0, 1.0, 11)
        mags = np.full((40, 11), 0.5)
        curve = sensitivity_cw(mags, g_tilde, detunings)
        np.testing.assert_allclose(curve.eta, 0.0, atol=1e-12)

    def test_q2_zero_traces(self):
        g_tilde = np.linspace(0.05, 2.0, 40)
        times = np.linspace(0.0, 100e-9, 201)
        curve = sensitivity_q2(np.zeros((40, 201)), g_tilde, times)
        np.testing.assert_allclose(curve.eta, 0.0, atol=1e-15)

    def test_q2_window_monotone_in_tf(self):
        rng = np.random.default_rng(1)
        g_tilde = np.linspace(0.05, 2.0, 40)
        times = np.linspace(0.0, 100e-9, 201)
        coh = np.abs(rng.standard_normal((40, 201)))
        full = sensitivity_q2(coh, g_tilde, times, t_f=100e-9)
        half = sensitivity_q2(coh, g_tilde, times, t_f=50e-9)
        assert np.all(half.eta <= full.eta + 1e-15)

    def test_q2_requires_window_coverage(self):
        g_tilde = np.linspace(0.05, 2.0, 10)
        times = np.linspace(0.0, 50e-9, 51)
        with pytest.raises(ValueError):
            sensitivity_q2(np.zeros((10, 51)), g_tilde, times, t_f=100e-9)

    def test_joint_rescaling_invariance(self, population_grid):
        # scaling signal and noise together leaves eta unchanged
        g_tilde = np.linspace(0.05, 2.0, 40)
        times = np.linspace(0.0, 100e-9, 101)
        rng = np.random.default_rng(3)
        coh = np.abs(rng.standard_normal((40, 101)))
        a = sensitivity_q2(coh, g_tilde, times, sigma=1.0)
        b = sensitivity_q2(3.0 * coh, g_tilde, times, sigma=3.0)
        np.testing.assert_allclose(a.eta, b.eta, rtol=1e-12)

    def test_normalized_curve(self, population_grid):
        g_tilde, times, pops = population_grid
        curve = sensitivity_q1(pops, g_tilde, times)
        normed = curve.normalized()
        assert normed.max() == pytest.approx(1.0)
        assert curve.raw_max > 0


class TestQuadratureConvergence:
    def test_q2_integral_stable_under_step_halving(self):
        from ptdimer.dynamics import q2_coherence_analytic

        g_tilde = np.arange(0.05, 2.0001, 0.05)
        etas = []
        for dt in (0.5e-9, 0.25e-9):
            times = np.arange(0.0, 100e-9 + 1e-15, dt)
            coh = np.array([
                q2_coherence_analytic(times, DimerParams.from_g_tilde(gt))
                for gt in g_tilde
            ])
            etas.append(sensitivity_q2(coh, g_tilde, times).eta)
        rel = np.abs(etas[1] - etas[0]) / np.max(etas[0])
        assert rel.max() < 0.01
