"""Post-processing: smoothing, filtering, differentiation and the three
sensitivity pipelines (continuous-wave, Q1 population, Q2 emission).

Sensitivity is the derivative of an observable with respect to the
relative coupling divided by the measurement noise. Noisy data is
smoothed along the coupling axis before differentiation, with a kernel
width proportional to 1/g_tilde (wider where the dynamics barely change
with coupling).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import butter, filtfilt

__all__ = [
    "SensitivityCurve",
    "gaussian_smooth",
    "smoothing_widths",
    "butterworth_lowpass",
    "d_dg",
    "smoothed_derivative",
    "sensitivity_cw",
    "sensitivity_q1",
    "sensitivity_q2",
]


@dataclass
class SensitivityCurve:
    """Unitless sensitivity eta versus relative coupling."""

    g_tilde: np.ndarray
    eta: np.ndarray
    argmax_axis: np.ndarray  # optimizing time or detuning per g_tilde
    observable: str = ""
    axis_name: str = ""
    noise_model: str = ""
    smoothing_c: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.g_tilde = np.asarray(self.g_tilde, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        if not np.all(np.isfinite(self.eta)):
            raise ValueError("eta must be finite everywhere")

    @property
    def raw_max(self) -> float:
        return float(self.eta.max()) if len(self.eta) else 0.0

    def normalized(self) -> np.ndarray:
        m = self.raw_max
        return self.eta / m if m > 0 else self.eta.copy()


def smoothing_widths(g_tilde, c: float = 1.0, lo: float = 0.5, hi: float = 10.0):
    """Per-sample kernel widths c/g_tilde, truncated to [lo, hi] samples."""
    g_tilde = np.asarray(g_tilde, dtype=float)
    with np.errstate(divide="ignore"):
        w = np.where(g_tilde > 0, c / np.where(g_tilde > 0, g_tilde, 1.0), hi)
    return np.clip(w, lo, hi)


def gaussian_smooth(values, width):
    """Discrete Gaussian smoothing along axis 0 with reflective boundaries.

    ``width`` is the kernel sigma in samples; a scalar applies one kernel
    everywhere, an array gives each output sample its own width.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty input")
    n = values.shape[0]
    widths = np.broadcast_to(np.asarray(width, dtype=float), (n,))
    if np.any(widths <= 0):
        raise ValueError("width must be positive")
    flat = values.reshape(n, -1)
    padded = np.concatenate([flat[::-1], flat, flat[::-1]], axis=0)
    positions = np.arange(-n, 2 * n, dtype=float)
    out = np.empty_like(flat)
    for i in range(n):
        kern = np.exp(-0.5 * ((positions - i) / widths[i]) ** 2)
        out[i] = kern @ padded / kern.sum()
    return out.reshape(values.shape)


def butterworth_lowpass(values, sample_dt: float, cutoff_hz: float, order: int = 4):
    """Zero-phase (forward-backward) Butterworth low-pass along the last axis."""
    values = np.asarray(values, dtype=float)
    nyquist = 0.5 / sample_dt
    if cutoff_hz >= nyquist:
        raise ValueError(
            f"cutoff {cutoff_hz:.3g} Hz is not below the Nyquist frequency {nyquist:.3g} Hz"
        )
    b, a = butter(order, cutoff_hz / nyquist, btype="low")
    return filtfilt(b, a, values, axis=-1)


def d_dg(values, dg: float, axis: int = 0):
    """Derivative along a uniform grid: central differences inside, one-sided at the edges."""
    values = np.asarray(values, dtype=float)
    if values.shape[axis] < 3:
        raise ValueError("need at least 3 grid points for differentiation")
    return np.gradient(values, dg, axis=axis)


def smoothed_derivative(values, g_tilde, c: float = 1.0,
                        width_bounds: tuple[float, float] = (0.5, 10.0)):
    """d(values)/d(g_tilde) after coupling-axis smoothing (axis 0).

    This is the intermediate field the sensitivity pipelines maximize or
    integrate over; exposed so report paths can emit it alongside the
    collapsed curves.
    """
    g_tilde = np.asarray(g_tilde, dtype=float)
    if len(g_tilde) > 1:
        steps = np.diff(g_tilde)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValueError("g_tilde grid must be uniform and increasing")
    widths = smoothing_widths(g_tilde, c, *width_bounds)
    smoothed = gaussian_smooth(values, widths)
    return d_dg(smoothed, g_tilde[1] - g_tilde[0], axis=0)


def sensitivity_cw(
    s21_magnitudes,
    g_tilde,
    detunings,
    sigma=1.0,
    smoothing_c: float = 1.0,
    width_bounds: tuple[float, float] = (0.5, 10.0),
) -> SensitivityCurve:
    """Continuous-wave sensitivity: best probe detuning per coupling.

    ``eta(g) = max over delta_p of |d|S21|/dg| / sigma(g)`` with the
    transmission magnitudes smoothed along the coupling axis first. The
    noise is constant by default.
    """
    mags = np.asarray(s21_magnitudes, dtype=float)
    detunings = np.asarray(detunings, dtype=float)
    sig_arr = np.broadcast_to(np.asarray(sigma, dtype=float), (mags.shape[0],))
    if np.any(sig_arr <= 0):
        raise ValueError("sigma must be positive")
    deriv = smoothed_derivative(mags, g_tilde, smoothing_c, width_bounds)
    ratio = np.abs(deriv) / sig_arr[:, None]
    best = np.argmax(ratio, axis=1)
    return SensitivityCurve(
        g_tilde=np.asarray(g_tilde, dtype=float),
        eta=ratio[np.arange(len(ratio)), best],
        argmax_axis=detunings[best],
        observable="abs(S21)",
        axis_name="delta_p",
        noise_model="constant sigma",
        smoothing_c=smoothing_c,
    )


def sensitivity_q1(
    populations,
    g_tilde,
    times,
    shots: int = 10_000,
    assignment_error: float = 0.01,
    smoothing_c: float = 1.0,
    width_bounds: tuple[float, float] = (0.5, 10.0),
) -> SensitivityCurve:
    """Pulsed-population sensitivity: best interaction time per coupling.

    Shot noise is the binomial standard error over ``shots`` repetitions.
    ``assignment_error`` adds a readout-misassignment variance floor
    (``sigma^2 = (P(1-P) + eps(1-eps))/N``); zero recovers the bare
    binomial formula, whose noise vanishes at P in {0, 1}.
    """
    pops = np.asarray(populations, dtype=float)
    times = np.asarray(times, dtype=float)
    eps = assignment_error
    variance = np.clip(pops * (1.0 - pops), 0.0, None) + eps * (1.0 - eps)
    sigma = np.sqrt(variance / shots)
    deriv = smoothed_derivative(pops, g_tilde, smoothing_c, width_bounds)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(sigma > 0, np.abs(deriv) / np.where(sigma > 0, sigma, 1.0), 0.0)
    best = np.argmax(ratio, axis=1)
    return SensitivityCurve(
        g_tilde=np.asarray(g_tilde, dtype=float),
        eta=ratio[np.arange(len(ratio)), best],
        argmax_axis=times[best],
        observable="q1_population",
        axis_name="time",
        noise_model=f"binomial shots={shots} assignment_error={eps}",
        smoothing_c=smoothing_c,
    )


def sensitivity_q2(
    coherences,
    g_tilde,
    times,
    sigma: float = 1.0,
    t_f: float = 100e-9,
    smoothing_c: float = 1.0,
    width_bounds: tuple[float, float] = (0.5, 10.0),
) -> SensitivityCurve:
    """Integrated emission sensitivity over the acquisition window.

    ``eta(g) = (1/sigma) * integral_0^t_f |d|<sigma_2^->|/dg| dt`` by
    trapezoidal quadrature; the whole time trace is acquired in each
    shot, so sensing information accumulates over the window.
    """
    coh = np.asarray(coherences, dtype=float)
    times = np.asarray(times, dtype=float)
    if times[-1] < t_f - 1e-15:
        raise ValueError("traces must cover the acquisition window [0, t_f]")
    if np.isscalar(sigma) and sigma <= 0:
        raise ValueError("sigma must be positive")
    deriv = np.abs(smoothed_derivative(coh, g_tilde, smoothing_c, width_bounds))
    window = times <= t_f + 1e-15
    eta = np.trapezoid(deriv[:, window], times[window], axis=1) / sigma
    return SensitivityCurve(
        g_tilde=np.asarray(g_tilde, dtype=float),
        eta=eta,
        argmax_axis=np.full(len(eta), t_f),
        observable="abs(q2_coherence)",
        axis_name="time_integrated",
        noise_model="constant sigma",
        smoothing_c=smoothing_c,
        meta={"t_f": t_f},
    )
