"""Hamiltonians, observables and initial states for the dimer and the
three-mode (qubit - tunable coupler - qubit) system.

Conventions (the wire-format contract for every matrix in the package):

* Each mode is a two-level system with per-site basis ``{|e>, |g>}``
  (excited first), so ``sigma_minus = [[0,0],[1,0]]`` and
  ``sigma_z = 2 sigma_plus sigma_minus - I = diag(1,-1)``.
* Multi-mode operators are Kronecker products with site 0 most
  significant. The dimer uses site order (Q1, Q2); the composite basis
  is then ``{|11>, |01>, |10>, |00>}`` labeled ``|q2 q1>`` by excitation,
  which makes the 4x4 Hamiltonian, M0, M1, psi0 and psi1 literal.
* The three-mode system uses site order (Q1, coupler, Q2).
* All angular quantities are rad/s internally. Constructors ending in
  ``_hz`` accept ordinary frequencies (omega/2pi) and convert.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .linalg import eig2x2, kron

__all__ = [
    "TWO_PI",
    "SIGMA_MINUS",
    "SIGMA_PLUS",
    "SIGMA_Z",
    "SIGMA_X",
    "DimerParams",
    "ThreeModeParams",
    "DriveParams",
    "lowering_op",
    "raising_op",
    "pauli_z_op",
    "pauli_x_op",
    "dimer_hamiltonian_full",
    "dimer_hamiltonian_1exc",
    "dimer_eigenvalues",
    "three_mode_hamiltonian",
    "three_mode_hamiltonian_lab",
    "driven_hamiltonian",
    "observables",
    "psi_q1_excited",
    "psi_q1_superposition",
    "product_state",
]

TWO_PI = 2.0 * np.pi

SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_Z = 2.0 * SIGMA_PLUS @ SIGMA_MINUS - np.eye(2)
SIGMA_X = SIGMA_PLUS + SIGMA_MINUS
_I2 = np.eye(2, dtype=complex)

# Device values used as defaults throughout (frequencies, not angular).
GAMMA_HZ = 17e6
OMEGA_HZ = 5.0e9
OMEGA_C_REF_HZ = 7.25e9  # fitted coupling-curve reference; 7.29e9 is the quoted alternative
G12_HZ = 5.9e6
G1C_REF_HZ = 112.4e6
G2C_REF_HZ = 101.2e6


def _embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} out of range for {n_sites} sites")
    if n_sites > 3:
        raise ValueError("at most 3 sites are supported")
    out = np.array([[1.0 + 0.0j]])
    for k in range(n_sites):
        out = kron(out, op if k == site else _I2)
    return out


def lowering_op(site: int, n_sites: int) -> np.ndarray:
    """sigma_minus embedded at ``site``: I x ... x sigma_minus x ... x I."""
    return _embed(SIGMA_MINUS, site, n_sites)


def raising_op(site: int, n_sites: int) -> np.ndarray:
    return _embed(SIGMA_PLUS, site, n_sites)


def pauli_z_op(site: int, n_sites: int) -> np.ndarray:
    return _embed(SIGMA_Z, site, n_sites)


def pauli_x_op(site: int, n_sites: int) -> np.ndarray:
    return _embed(SIGMA_X, site, n_sites)


@dataclass(frozen=True)
class DimerParams:
    """Passive PT dimer: waveguide decay ``gamma`` and coupling ``g`` (rad/s)."""

    gamma: float
    g: float

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.g < 0.0:
            raise ValueError("g must be non-negative")

    @classmethod
    def from_hz(cls, gamma_hz: float = GAMMA_HZ, g_hz: float = 0.0) -> "DimerParams":
        return cls(gamma=TWO_PI * gamma_hz, g=TWO_PI * g_hz)

    @classmethod
    def from_g_tilde(cls, g_tilde: float, gamma_hz: float = GAMMA_HZ) -> "DimerParams":
        gamma = TWO_PI * gamma_hz
        return cls(gamma=gamma, g=g_tilde * gamma / 4.0)

    @property
    def g_tilde(self) -> float:
        """Relative coupling 4g/gamma; 1 at the exceptional point."""
        return 4.0 * self.g / self.gamma

    @property
    def Gamma(self) -> complex:
        """2*sqrt((gamma/4)^2 - g^2): real below the EP, imaginary above."""
        disc = (self.gamma / 4.0) ** 2 - self.g**2
        if disc >= 0.0:
            return complex(2.0 * np.sqrt(disc), 0.0)
        return complex(0.0, 2.0 * np.sqrt(-disc))


@dataclass(frozen=True)
class ThreeModeParams:
    """Two resonant qubits plus a tunable coupler (all angular, rad/s).

    ``g1c_ref``/``g2c_ref`` are the qubit-coupler couplings at the
    reference coupler frequency ``omega_c_ref``; at other coupler
    frequencies each scales by sqrt(omega_c/omega_c_ref) so their
    product carries one factor of omega_c/omega_c_ref.

    ``q1_offset``/``q2_offset`` are bare-frequency offsets relative to
    the rotating frame, used to reference the frame to the dressed idle
    qubit frequency (see ``coupler.CouplerMap.operating_params``).
    """

    omega1: float
    omega2: float
    omega_c: float
    omega_c_ref: float
    g12: float
    g1c_ref: float
    g2c_ref: float
    gamma: float
    q1_offset: float = 0.0
    q2_offset: float = 0.0

    def __post_init__(self):
        if self.omega1 != self.omega2:
            raise ValueError("the model assumes resonant qubits (omega1 == omega2)")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        delta = self.omega1 - self.omega_c
        if delta != 0.0:
            worst = max(abs(self.g1c(self.omega_c)), abs(self.g2c(self.omega_c)))
            if worst / abs(delta) > 0.2:
                warnings.warn(
                    "qubit-coupler coupling exceeds 0.2*|detuning|; the "
                    "effective-coupling formulas degrade here",
                    stacklevel=2,
                )

    @classmethod
    def from_hz(
        cls,
        omega_hz: float = OMEGA_HZ,
        omega_c_hz: float = OMEGA_C_REF_HZ,
        omega_c_ref_hz: float = OMEGA_C_REF_HZ,
        g12_hz: float = G12_HZ,
        g1c_ref_hz: float = G1C_REF_HZ,
        g2c_ref_hz: float = G2C_REF_HZ,
        gamma_hz: float = GAMMA_HZ,
    ) -> "ThreeModeParams":
        return cls(
            omega1=TWO_PI * omega_hz,
            omega2=TWO_PI * omega_hz,
            omega_c=TWO_PI * omega_c_hz,
            omega_c_ref=TWO_PI * omega_c_ref_hz,
            g12=TWO_PI * g12_hz,
            g1c_ref=TWO_PI * g1c_ref_hz,
            g2c_ref=TWO_PI * g2c_ref_hz,
            gamma=TWO_PI * gamma_hz,
        )

    @property
    def omega(self) -> float:
        return self.omega1

    @property
    def delta(self) -> float:
        """Qubit-coupler detuning omega - omega_c (negative for coupler above)."""
        return self.omega - self.omega_c

    @property
    def Sigma(self) -> float:
        return self.omega + self.omega_c

    def coupling_scale(self, omega_c: float | None = None) -> float:
        wc = self.omega_c if omega_c is None else omega_c
        return float(np.sqrt(wc / self.omega_c_ref))

    def g1c(self, omega_c: float | None = None) -> float:
        return self.g1c_ref * self.coupling_scale(omega_c)

    def g2c(self, omega_c: float | None = None) -> float:
        return self.g2c_ref * self.coupling_scale(omega_c)

    def at_coupler_frequency(self, omega_c: float) -> "ThreeModeParams":
        return replace(self, omega_c=omega_c)


@dataclass(frozen=True)
class DriveParams:
    """Coherent probe applied to the lossy qubit through the waveguide."""

    omega_p: float
    delta_p: float
    Omega_p: float

    def __post_init__(self):
        if self.Omega_p < 0.0:
            raise ValueError("Omega_p must be non-negative")

    @classmethod
    def resonant(cls, p: ThreeModeParams, Omega_p: float) -> "DriveParams":
        return cls(omega_p=p.omega, delta_p=0.0, Omega_p=Omega_p)


def dimer_hamiltonian_full(p: DimerParams) -> np.ndarray:
    """Non-Hermitian 4x4 dimer Hamiltonian in the {|11>,|01>,|10>,|00>} basis.

    Built from operator embeddings; equals the literal matrix
    ``[[-i*gamma/2, 0, 0, 0], [0, 0, g, 0], [0, g, -i*gamma/2, 0], [0, 0, 0, 0]]``.
    """
    sm1, sm2 = lowering_op(0, 2), lowering_op(1, 2)
    sp1, sp2 = raising_op(0, 2), raising_op(1, 2)
    h = -0.5j * p.gamma * (sp2 @ sm2)
    h = h + p.g * (sp1 @ sm2 + sp2 @ sm1)
    return h


def dimer_hamiltonian_1exc(p: DimerParams) -> np.ndarray:
    """Single-excitation block [[0, g], [g, -i gamma/2]]."""
    return np.array([[0.0, p.g], [p.g, -0.5j * p.gamma]], dtype=complex)


def dimer_eigenvalues(p: DimerParams, doubled: bool = False) -> tuple[complex, complex]:
    """Complex eigenenergies of the single-excitation dimer.

    The matrix view returns the eigenvalues of the 2x2 Hamiltonian,
    ``-i gamma/4 +- i Gamma/2``. ``doubled=True`` returns twice those
    values (``-i gamma/2 +- i Gamma``), the population-rate view whose
    common imaginary offset is the average loss rate gamma/2.
    """
    e1, e2 = eig2x2(dimer_hamiltonian_1exc(p))
    if doubled:
        return 2.0 * e1, 2.0 * e2
    return e1, e2


def observables() -> tuple[np.ndarray, np.ndarray]:
    """(M0, M1): Q1 excited-population projector and Q2 coherence operator."""
    m0 = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    m1 = lowering_op(1, 2)
    return m0, m1


def psi_q1_excited() -> np.ndarray:
    """|psi0> = (0,1,0,0): Q1 excited, Q2 ground."""
    return np.array([0.0, 1.0, 0.0, 0.0], dtype=complex)


def psi_q1_superposition() -> np.ndarray:
    """|psi1> = (0,1,0,1)/sqrt(2): Q1 in (|g>+|e>)/sqrt(2), Q2 ground."""
    return np.array([0.0, 1.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)


def product_state(site_amplitudes: list[tuple[complex, complex]]) -> np.ndarray:
    """Tensor product of per-site states given as (excited, ground) pairs."""
    state = np.array([1.0 + 0.0j])
    for exc, gnd in site_amplitudes:
        state = np.kron(state, np.array([exc, gnd], dtype=complex))
    n = np.linalg.norm(state)
    if n == 0.0:
        raise ValueError("product state has zero norm")
    return state / n


def _three_mode_couplings(p: ThreeModeParams) -> np.ndarray:
    sm = [lowering_op(k, 3) for k in range(3)]
    sp = [raising_op(k, 3) for k in range(3)]
    q1, c, q2 = 0, 1, 2
    h = p.g12 * (sp[q1] @ sm[q2] + sp[q2] @ sm[q1])
    h = h + p.g1c() * (sp[q1] @ sm[c] + sp[c] @ sm[q1])
    h = h + p.g2c() * (sp[q2] @ sm[c] + sp[c] @ sm[q2])
    return h


def three_mode_hamiltonian(p: ThreeModeParams) -> np.ndarray:
    """8x8 Hermitian Hamiltonian in the rotating frame of the qubits.

    Site order (Q1, coupler, Q2). The coupler excitation sits at
    ``omega_c - omega = -delta > 0`` above the qubits, the sign required
    for the exchange-coupling and Lamb-shift formulas it must reproduce
    (the driven Hamiltonian's ``(omega_c - omega_p)/2 sigma_z^c`` term in
    the limit omega_p -> omega). Excitation number is conserved.
    """
    h = 0.5 * (p.omega_c - p.omega) * pauli_z_op(1, 3)
    h = h + 0.5 * p.q1_offset * pauli_z_op(0, 3)
    h = h + 0.5 * p.q2_offset * pauli_z_op(2, 3)
    return h + _three_mode_couplings(p)


def three_mode_hamiltonian_lab(p: ThreeModeParams) -> np.ndarray:
    """Lab-frame 8x8 with full transverse (sigma_x sigma_x) couplings.

    Keeps the counter-rotating terms, so its avoided-crossing splitting
    includes the 1/(omega+omega_c) contribution to the effective
    coupling. Used to validate the effective-coupling formula; not used
    for time evolution.
    """
    q1, c, q2 = 0, 1, 2
    sx = [pauli_x_op(k, 3) for k in range(3)]
    h = 0.5 * (p.omega + p.q1_offset) * pauli_z_op(q1, 3)
    h = h + 0.5 * (p.omega + p.q2_offset) * pauli_z_op(q2, 3)
    h = h + 0.5 * p.omega_c * pauli_z_op(c, 3)
    h = h + p.g12 * sx[q1] @ sx[q2]
    h = h + p.g1c() * sx[q1] @ sx[c]
    h = h + p.g2c() * sx[q2] @ sx[c]
    return h


def driven_hamiltonian(p: ThreeModeParams, d: DriveParams) -> np.ndarray:
    """Probe-frame Hamiltonian: qubit/coupler detunings plus a sigma_x drive on Q2.

    Reduces to ``three_mode_hamiltonian`` for Omega_p = 0, delta_p = 0.
    """
    q1, c, q2 = 0, 1, 2
    h = 0.5 * (d.delta_p + p.q1_offset) * pauli_z_op(q1, 3)
    h = h + 0.5 * (d.delta_p + p.q2_offset) * pauli_z_op(q2, 3)
    h = h + 0.5 * (p.omega_c - p.omega + d.delta_p) * pauli_z_op(c, 3)
    h = h + 0.5 * d.Omega_p * pauli_x_op(q2, 3)
    return h + _three_mode_couplings(p)
