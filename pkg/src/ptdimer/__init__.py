"""Passive PT-dimer / waveguide-QED simulator and sensitivity pipelines."""

from .coupler import CouplerMap, CouplingRangeError, SingularDetuningError
from .dynamics import (
    DegenerateSteadyStateError,
    EmissionSweep,
    Spectrum,
    TimeTrace,
    Trajectory,
    dimer_engine_traces,
    emission_amplitude,
    evolve_nonhermitian,
    lindblad_evolve,
    q1_population_analytic,
    q2_coherence_analytic,
    simulate_q2_emission_sweep,
    steady_state,
    transmission_spectrum,
)
from .estimation import (
    FitResult,
    dip_positions,
    eigenenergy_trace,
    fit_coherence,
    fit_population,
    peak_splitting,
    synth_emission,
    synth_population,
)
from .model import (
    DimerParams,
    DriveParams,
    ThreeModeParams,
    dimer_eigenvalues,
    dimer_hamiltonian_1exc,
    dimer_hamiltonian_full,
    driven_hamiltonian,
    lowering_op,
    observables,
    three_mode_hamiltonian,
    three_mode_hamiltonian_lab,
)
from .signal import (
    SensitivityCurve,
    butterworth_lowpass,
    d_dg,
    gaussian_smooth,
    sensitivity_cw,
    sensitivity_q1,
    sensitivity_q2,
    smoothing_widths,
)

__version__ = "0.1.0"
