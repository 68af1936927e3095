"""Time evolution, steady states, emission and transmission.

Three engines cover the dimer dynamics and serve as mutual oracles:

* closed-form expressions for the Q1 population and Q2 coherence,
* the 4x4 non-Hermitian propagator exp(-i H_full t),
* the Lindblad master equation (vectorized Liouvillian, dense
  exponential propagation -- exact to rounding at these dimensions).

The continuous-wave transmission follows the input-output relation: the
emitted field adds ``sqrt(gamma/2) <sigma_2^->`` to the transmitted
input, normalized so that a lone resonant weakly driven qubit
extinguishes the forward signal completely (S21 -> 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import signal as sig
from .coupler import CouplerMap
from .linalg import SingularMatrixError, expm, hermiticity_defect, solve_linear
from .model import (
    DimerParams,
    DriveParams,
    ThreeModeParams,
    dimer_hamiltonian_full,
    driven_hamiltonian,
    lowering_op,
    observables,
    product_state,
    psi_q1_excited,
    psi_q1_superposition,
    three_mode_hamiltonian,
)

__all__ = [
    "TimeTrace",
    "Spectrum",
    "Trajectory",
    "EmissionSweep",
    "DegenerateSteadyStateError",
    "q1_population_analytic",
    "q2_coherence_analytic",
    "evolve_nonhermitian",
    "liouvillian",
    "lindblad_evolve",
    "steady_state",
    "emission_amplitude",
    "transmission_spectrum",
    "simulate_q2_emission_sweep",
    "dimer_engine_traces",
    "check_density_matrix",
]

DENSITY_HERMITICITY_TOL = 1e-10
DENSITY_TRACE_TOL = 1e-9
DENSITY_EIGVAL_FLOOR = -1e-8
STEADY_RESIDUAL_TOL = 1e-9


@dataclass
class TimeTrace:
    """Samples of one observable on a uniform time grid."""

    times: np.ndarray
    values: np.ndarray
    g_tilde: float | None = None
    label: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values)
        if self.times.ndim != 1 or self.values.shape[0] != self.times.shape[0]:
            raise ValueError("times and values must be 1-d and equally long")
        if len(self.times) > 1:
            steps = np.diff(self.times)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
                raise ValueError("time grid must be uniform and increasing")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


@dataclass
class Spectrum:
    """Complex transmission versus probe detuning delta_p = omega - omega_p."""

    detunings: np.ndarray
    s21: np.ndarray
    g_tilde: float | None = None
    Omega_p: float | None = None

    def __post_init__(self):
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.s21 = np.asarray(self.s21, dtype=complex)
        if self.detunings.shape != self.s21.shape:
            raise ValueError("detuning grid and s21 must have the same shape")


@dataclass
class Trajectory:
    """Evolved states plus expectation-value traces."""

    times: np.ndarray
    states: np.ndarray  # (nt, dim) kets or (nt, dim, dim) density matrices
    expectations: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class EmissionSweep:
    """|<sigma_2^-(t)>| over a (g_tilde, t) grid, before/after low-pass."""

    g_tilde: np.ndarray
    times: np.ndarray
    filtered: np.ndarray
    raw: np.ndarray


class DegenerateSteadyStateError(ValueError):
    def __init__(self, kernel_dim: int):
        super().__init__(
            f"Liouvillian kernel is {kernel_dim}-dimensional; steady state not unique"
        )
        self.kernel_dim = kernel_dim


def _exp_cosh(a, x):
    """exp(-a) cosh(x) without overflow (Re x <= a in this package)."""
    return 0.5 * (np.exp(x - a) + np.exp(-x - a))


def _exp_sinhc(a, x):
    """exp(-a) sinh(x)/x, stable through x = 0 (series below |x| = 1e-3)."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, x)
    out = 0.5 * (np.exp(safe - a) - np.exp(-safe - a)) / safe
    xs = np.where(small, x, 0.0)
    series = np.exp(-a) * (1.0 + xs**2 / 6.0 + xs**4 / 120.0)
    return np.where(small, series, out)


def q1_population_analytic(t, p: DimerParams):
    """Excited-state population of the low-loss qubit started in |e>.

    ``exp(-gamma t/2) |cosh(Gamma t/2) + (gamma/(2 Gamma)) sinh(Gamma t/2)|^2``,
    evaluated through the critical-damping point via sinh(x)/x (the
    Gamma -> 0 limit is exp(-gamma t/2) (1 + gamma t/4)^2) and with the
    overall decay folded into the hyperbolics so long time grids cannot
    overflow.
    """
    t = np.asarray(t, dtype=float)
    a = p.gamma * t / 4.0
    x = p.Gamma * t / 2.0
    amp = _exp_cosh(a, x) + (p.gamma * t / 4.0) * _exp_sinhc(a, x)
    out = np.abs(amp) ** 2
    return float(out) if out.ndim == 0 else out


def q2_coherence_analytic(t, p: DimerParams):
    """|<sigma_2^-(t)>| for the dimer started with Q1 in (|g>+|e>)/sqrt(2).

    ``(g/Gamma) exp(-gamma t/4) |sinh(Gamma t/2)|`` with the Gamma -> 0
    limit ``(g t/2) exp(-gamma t/4)``.
    """
    t = np.asarray(t, dtype=float)
    a = p.gamma * t / 4.0
    x = p.Gamma * t / 2.0
    out = np.abs(p.g * (t / 2.0) * _exp_sinhc(a, x))
    return float(out) if out.ndim == 0 else out


def _default_observables(dim: int, observables_in):
    if observables_in is not None:
        return dict(observables_in)
    if dim == 4:
        m0, m1 = observables()
        return {"q1_population": m0, "q2_coherence": m1}
    return {}


def _expectation(op: np.ndarray, trace_fn):
    vals = trace_fn(op)
    # Hermitian observables get real traces
    return vals.real if hermiticity_defect(op) < 1e-12 else vals


def _check_uniform_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1:
        raise ValueError("times must be a non-empty 1-d grid")
    if len(times) > 1:
        steps = np.diff(times)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValueError("time grid must be uniform and increasing")
    return times


def evolve_nonhermitian(h, psi0, times, observables_map=None) -> Trajectory:
    """Sample ``|psi(t)> = exp(-i H t) |psi0>`` on a uniform grid.

    Returns the state trajectory plus expectation traces; for a
    4-dimensional dimer state the Q1-population and Q2-coherence
    observables are attached by default.
    """
    h = np.asarray(h, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("h must be square")
    if psi0.shape != (h.shape[0],):
        raise ValueError(f"state dimension {psi0.shape} does not match {h.shape}")
    times = _check_uniform_times(times)
    dim = h.shape[0]
    states = np.empty((len(times), dim), dtype=complex)
    psi = expm(-1j * h * times[0]) @ psi0 if times[0] != 0.0 else psi0.copy()
    if len(times) > 1:
        u_step = expm(-1j * h * (times[1] - times[0]))
    for k in range(len(times)):
        states[k] = psi
        if k + 1 < len(times):
            psi = u_step @ psi
    obs = _default_observables(dim, observables_map)
    expect = {
        name: _expectation(op, lambda o: np.einsum("ti,ij,tj->t", states.conj(), o, states))
        for name, op in obs.items()
    }
    return Trajectory(times=times, states=states, expectations=expect)


def liouvillian(h, collapse) -> np.ndarray:
    """Vectorized generator of ``drho/dt = -i[H,rho] + sum_k rate_k D[O_k] rho``.

    Uses row-major vectorization: vec(A rho B) = (A kron B^T) vec(rho).
    """
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    eye = np.eye(d)
    L = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, op in collapse:
        if rate < 0.0:
            raise ValueError("collapse rates must be non-negative")
        op = np.asarray(op, dtype=complex)
        opd_op = op.conj().T @ op
        L = L + rate * (
            np.kron(op, op.conj())
            - 0.5 * (np.kron(opd_op, eye) + np.kron(eye, opd_op.T))
        )
    return L


def check_density_matrix(rho, context: str = "rho"):
    """Enforce Hermiticity, unit trace and positivity (small tolerances)."""
    rho = np.asarray(rho, dtype=complex)
    herm = hermiticity_defect(rho)
    if herm > DENSITY_HERMITICITY_TOL:
        raise ValueError(f"{context}: hermiticity defect {herm:.2e}")
    tr = abs(np.trace(rho) - 1.0)
    if tr > DENSITY_TRACE_TOL:
        raise ValueError(f"{context}: trace defect {tr:.2e}")
    lo = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if lo < DENSITY_EIGVAL_FLOOR:
        raise ValueError(f"{context}: negative eigenvalue {lo:.2e}")


def lindblad_evolve(h, collapse, rho0, times, observables_map=None) -> Trajectory:
    """Propagate the master equation by exponentiating the Liouvillian.

    ``h`` must be Hermitian (the non-Hermitian dimer is handled by
    ``evolve_nonhermitian``; loss enters here through collapse
    operators only).
    """
    h = np.asarray(h, dtype=complex)
    scale = max(float(np.max(np.abs(h))), 1.0)
    if hermiticity_defect(h) > 1e-10 * scale:
        raise ValueError("lindblad_evolve requires a Hermitian Hamiltonian")
    rho0 = np.asarray(rho0, dtype=complex)
    check_density_matrix(rho0, "rho0")
    times = _check_uniform_times(times)
    d = h.shape[0]
    L = liouvillian(h, collapse)
    vec = rho0.reshape(-1).copy()
    if times[0] != 0.0:
        vec = expm(L * times[0]) @ vec
    if len(times) > 1:
        u_step = expm(L * (times[1] - times[0]))
    states = np.empty((len(times), d, d), dtype=complex)
    for k in range(len(times)):
        states[k] = vec.reshape(d, d)
        if k + 1 < len(times):
            vec = u_step @ vec
    obs = _default_observables(d, observables_map)
    expect = {
        name: _expectation(op, lambda o: np.einsum("ij,tji->t", o, states))
        for name, op in obs.items()
    }
    return Trajectory(times=times, states=states, expectations=expect)


def _kernel_dimension(L_scaled: np.ndarray) -> int:
    s = np.linalg.svd(L_scaled, compute_uv=False)
    return int(np.sum(s < 1e-10 * s[0]))


def steady_state(h_driven, collapse) -> np.ndarray:
    """Solve ``L rho = 0`` with the unit-trace constraint replacing one row.

    The Liouvillian is normalized by its largest entry before solving so
    the residual test ``||L rho|| < 1e-9`` is scale-free. A degenerate
    kernel raises ``DegenerateSteadyStateError`` with the estimated
    kernel dimension.
    """
    h_driven = np.asarray(h_driven, dtype=complex)
    d = h_driven.shape[0]
    L = liouvillian(h_driven, collapse)
    scale = float(np.max(np.abs(L)))
    if scale == 0.0:
        raise DegenerateSteadyStateError(d * d)
    Ls = L / scale
    A = Ls.copy()
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[np.arange(d) * (d + 1)] = 1.0
    A[0, :] = trace_row
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    try:
        vec = solve_linear(A, b)
    except SingularMatrixError:
        raise DegenerateSteadyStateError(_kernel_dimension(Ls)) from None
    residual = float(np.linalg.norm(Ls @ vec))
    if residual > STEADY_RESIDUAL_TOL:
        kdim = _kernel_dimension(Ls)
        if kdim != 1:
            raise DegenerateSteadyStateError(kdim)
        raise SingularMatrixError(f"steady-state residual {residual:.2e}")
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)  # scrub rounding-level asymmetry
    return rho / np.trace(rho).real


def emission_amplitude(trace: TimeTrace, p: DimerParams) -> TimeTrace:
    """Waveguide field from the qubit coherence: <a(t)> = sqrt(gamma/2) <sigma_2^-(t)>."""
    return TimeTrace(
        times=trace.times,
        values=np.sqrt(p.gamma / 2.0) * np.asarray(trace.values),
        g_tilde=trace.g_tilde,
        label="emission_amplitude",
    )


def transmission_spectrum(p: ThreeModeParams, d: DriveParams, detunings) -> Spectrum:
    """Steady-state S21 over a probe-detuning grid.

    ``S21 = 1 - i gamma <sigma_2^->_ss / Omega_p``; the -i fixes the
    input phase so a lone resonant qubit gives full extinction.
    """
    if d.Omega_p <= 0.0:
        raise ValueError("transmission needs a non-zero probe amplitude")
    detunings = np.asarray(detunings, dtype=float)
    sm2 = lowering_op(2, 3)
    h0 = driven_hamiltonian(p, DriveParams(omega_p=p.omega, delta_p=0.0, Omega_p=d.Omega_p))
    # detuning enters linearly through (sigma_z1 + sigma_z2 + sigma_zc)/2
    h1 = driven_hamiltonian(p, DriveParams(omega_p=p.omega - 1.0, delta_p=1.0, Omega_p=d.Omega_p)) - h0
    L0 = liouvillian(h0, [(p.gamma, sm2)])
    L1 = liouvillian(h1, [])
    s21 = np.empty(len(detunings), dtype=complex)
    eye8 = np.eye(8)
    for i, dp in enumerate(detunings):
        L = L0 + dp * L1
        scale = float(np.max(np.abs(L)))
        A = L / scale
        trace_row = np.zeros(64, dtype=complex)
        trace_row[np.arange(8) * 9] = 1.0
        A[0, :] = trace_row
        b = np.zeros(64, dtype=complex)
        b[0] = 1.0
        vec = solve_linear(A, b)
        rho = vec.reshape(8, 8)
        coherence = np.trace(sm2 @ rho)
        s21[i] = 1.0 - 1j * p.gamma * coherence / d.Omega_p
    return Spectrum(detunings=detunings, s21=s21, g_tilde=None, Omega_p=d.Omega_p)


def simulate_q2_emission_sweep(
    cmap: CouplerMap,
    g_tildes,
    times,
    sim_dt: float = 0.1e-9,
    cutoff_hz: float = 80e6,
    filter_order: int = 4,
) -> EmissionSweep:
    """Three-mode |<sigma_2^-(t)>| for each relative coupling.

    For each g_tilde the coupler frequency comes from the map's inverse
    calibration; the system starts with Q1 in (|g>+|e>)/sqrt(2) and
    evolves under the master equation. The expectation is sampled on an
    internal grid fine enough to resolve the coupler-detuning ripple,
    low-pass filtered (zero-phase Butterworth), then decimated onto the
    requested output grid.
    """
    g_tildes = np.asarray(g_tildes, dtype=float)
    times = _check_uniform_times(times)
    if times[0] != 0.0:
        raise ValueError("emission sweep expects a grid starting at t = 0")
    dt_out = times[1] - times[0] if len(times) > 1 else sim_dt
    stride = max(int(np.ceil(dt_out / sim_dt - 1e-9)), 1)
    dt = dt_out / stride
    n_fine = (len(times) - 1) * stride + 1
    fine_times = np.arange(n_fine) * dt

    gamma = cmap.params.gamma
    sm2 = lowering_op(2, 3)
    psi = product_state([(1.0, 1.0), (0.0, 1.0), (0.0, 1.0)])  # Q1 superposed
    rho0 = np.outer(psi, psi.conj())

    raw = np.empty((len(g_tildes), len(times)))
    filtered = np.empty_like(raw)
    for a, gt in enumerate(g_tildes):
        p = cmap.operating_params(gt * gamma / 4.0)
        h = three_mode_hamiltonian(p)
        traj = lindblad_evolve(
            h, [(gamma, sm2)], rho0, fine_times, observables_map={"c": sm2}
        )
        coh = np.abs(traj.expectations["c"])
        smooth = sig.butterworth_lowpass(coh, dt, cutoff_hz, order=filter_order)
        raw[a] = coh[::stride]
        filtered[a] = smooth[::stride]
    return EmissionSweep(g_tilde=g_tildes, times=times, filtered=filtered, raw=raw)


def dimer_engine_traces(p: DimerParams, times) -> dict[str, np.ndarray]:
    """Q1 population and Q2 coherence from all three dimer engines.

    Keys: ``population_analytic``, ``population_propagator``,
    ``population_lindblad`` and the ``coherence_*`` counterparts. The
    Lindblad engine uses the Hermitian exchange coupling plus a
    sqrt(gamma) sigma_2^- collapse operator, which reproduces the
    non-Hermitian dynamics exactly because the quantum jump only feeds
    the dark ground state.
    """
    times = _check_uniform_times(times)
    m0, m1 = observables()
    h_full = dimer_hamiltonian_full(p)

    prop_pop = evolve_nonhermitian(h_full, psi_q1_excited(), times)
    prop_coh = evolve_nonhermitian(h_full, psi_q1_superposition(), times)

    h_exchange = 0.5 * (h_full + h_full.conj().T)
    sm2 = lowering_op(1, 2)
    psi0 = psi_q1_excited()
    psi1 = psi_q1_superposition()
    lb_pop = lindblad_evolve(
        h_exchange, [(p.gamma, sm2)], np.outer(psi0, psi0.conj()), times
    )
    lb_coh = lindblad_evolve(
        h_exchange, [(p.gamma, sm2)], np.outer(psi1, psi1.conj()), times
    )

    return {
        "times": times,
        "population_analytic": q1_population_analytic(times, p),
        "population_propagator": prop_pop.expectations["q1_population"].real,
        "population_lindblad": lb_pop.expectations["q1_population"].real,
        "coherence_analytic": q2_coherence_analytic(times, p),
        "coherence_propagator": np.abs(prop_coh.expectations["q2_coherence"]),
        "coherence_lindblad": np.abs(lb_coh.expectations["q2_coherence"]),
    }
