"""Effective qubit-qubit coupling versus coupler frequency, and the
inverse (calibration) map used to emulate experimental coupling sweeps.

The effective coupling mediated by a far-detuned coupler at frequency
``omega_c``, with the qubits resonant at ``omega``, is

    g_eff(omega_c) = g1c_ref*g2c_ref*(omega_c/omega_c_ref)*(1/delta - 1/Sigma) + g12

with ``delta = omega - omega_c`` and ``Sigma = omega + omega_c``. The
``1/Sigma`` piece comes from counter-rotating terms; a rotating-wave
(excitation-conserving) model realizes only the ``1/delta`` part.
``CouplerMap(counter_rotating=False)`` builds that variant, which is the
right calibration for driving the rotating-frame simulations: the sweep
then delivers exactly the coupling the simulated model realizes.

Both map variants define their own decoupled idle point (the zero
crossing of g_eff near the reference frequency) and a monotone branch
below it on which |g_eff| is inverted by bisection.
"""

from __future__ import annotations

import numpy as np

from .model import TWO_PI, ThreeModeParams

__all__ = ["CouplerMap", "CouplingRangeError", "SingularDetuningError"]

# Inversion tolerance on the coupling itself.
G_TOLERANCE = TWO_PI * 1e3


class SingularDetuningError(ValueError):
    """g_eff evaluated at omega_c = +-omega, where the formula is singular."""


class CouplingRangeError(ValueError):
    """Requested coupling outside the range attainable on the branch."""


class CouplerMap:
    """Coupling and Lamb-shift formulas for one three-mode parameter set.

    Parameters
    ----------
    params : ThreeModeParams
        Supplies omega, omega_c_ref, the reference couplings, and g12.
        The ``omega_c`` field of ``params`` is ignored here.
    counter_rotating : bool
        Include the 1/Sigma (counter-rotating) term. Use False when the
        map calibrates sweeps of the rotating-frame model.
    scale_lamb_shift : bool
        Apply the omega_c/omega_c_ref coupling scaling inside the Lamb
        shift as well (consistent with g_eff). False leaves the
        reference couplings unscaled in lambda_j.
    scale_couplings : bool
        Apply the omega_c/omega_c_ref factor in g_eff. False freezes the
        couplings at their reference values (then g_eff -> g12 as
        omega_c -> infinity, the textbook decoupling limit).
    omega_c_min : float, optional
        Lower edge of the branch (rad/s). Defaults to omega + 2pi*0.35 GHz,
        deep enough to reach g_tilde ~ 4 for the default device values.
    """

    def __init__(
        self,
        params: ThreeModeParams,
        counter_rotating: bool = True,
        scale_lamb_shift: bool = True,
        scale_couplings: bool = True,
        omega_c_min: float | None = None,
    ):
        self.params = params
        self.counter_rotating = counter_rotating
        self.scale_lamb_shift = scale_lamb_shift
        self.scale_couplings = scale_couplings
        self.omega_c_min = (
            params.omega + TWO_PI * 0.35e9 if omega_c_min is None else float(omega_c_min)
        )
        if self.omega_c_min <= params.omega:
            raise ValueError("omega_c_min must lie above the qubit frequency")
        # Parameter sets without a decoupling point (e.g. one coupling
        # zero) still give a valid formula map; only the inverse map is
        # then unavailable.
        try:
            self.omega_c_zero = self._find_zero_crossing()
        except ValueError:
            self.omega_c_zero = None
            self.max_abs_g = None
        else:
            self._check_branch()

    # -- formulas ---------------------------------------------------------

    def _virtual_factor(self, omega_c):
        omega_c = np.asarray(omega_c, dtype=float)
        if np.any(omega_c == self.params.omega) or np.any(omega_c == -self.params.omega):
            raise SingularDetuningError("omega_c coincides with +-omega")
        delta = self.params.omega - omega_c
        factor = 1.0 / delta
        if self.counter_rotating:
            factor = factor - 1.0 / (self.params.omega + omega_c)
        return factor

    def g_eff(self, omega_c):
        """Signed effective qubit-qubit coupling at omega_c (rad/s)."""
        p = self.params
        scale = np.asarray(omega_c, dtype=float) / p.omega_c_ref if self.scale_couplings else 1.0
        out = p.g1c_ref * p.g2c_ref * scale * self._virtual_factor(omega_c) + p.g12
        return float(out) if np.isscalar(omega_c) else out

    def lamb_shift(self, omega_c, qubit: int):
        """Dispersive frequency shift lambda_j of qubit ``qubit`` (1 or 2)."""
        if qubit not in (1, 2):
            raise ValueError("qubit must be 1 or 2")
        p = self.params
        g_ref = p.g1c_ref if qubit == 1 else p.g2c_ref
        g_sq = g_ref**2
        if self.scale_lamb_shift:
            g_sq = g_sq * np.asarray(omega_c, dtype=float) / p.omega_c_ref
        out = g_sq * self._virtual_factor(omega_c)
        return float(out) if np.isscalar(omega_c) else out

    # -- branch / inverse map ---------------------------------------------

    def _find_zero_crossing(self) -> float:
        lo = self.omega_c_min
        hi = max(self.params.omega_c_ref, self.params.omega + TWO_PI * 3e9)
        flo, fhi = self.g_eff(lo), self.g_eff(hi)
        if flo * fhi > 0.0:
            raise ValueError("g_eff does not change sign above the qubit frequency")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = self.g_eff(mid)
            if abs(fm) < 0.01 * G_TOLERANCE or hi - lo < 1e-3:
                return mid
            if flo * fm <= 0.0:
                hi = mid
            else:
                lo, flo = mid, fm
        return 0.5 * (lo + hi)

    def _check_branch(self):
        # monotone on a 1 kHz grid over (omega_c_min, omega_c_zero]
        n = max(int((self.omega_c_zero - self.omega_c_min) / (TWO_PI * 1e3)), 2)
        grid = np.linspace(self.omega_c_min, self.omega_c_zero, n)
        vals = self.g_eff(grid)
        diffs = np.diff(vals)
        if not (np.all(diffs > 0.0) or np.all(diffs < 0.0)):
            raise ValueError("g_eff is not monotone on the inversion branch")
        self.max_abs_g = float(abs(vals[0]))

    def omega_c_for_g(self, g_target: float) -> float:
        """Coupler frequency with |g_eff| equal to |g_target|, by bisection.

        The branch runs from ``omega_c_min`` up to the calibrated zero
        crossing, where g_eff is negative and |g_eff| decreases
        monotonically, so the target is bracketed whenever it is
        attainable.
        """
        if self.omega_c_zero is None:
            raise CouplingRangeError("this parameter set has no decoupling point to calibrate against")
        target = abs(float(g_target))
        if target > self.max_abs_g:
            raise CouplingRangeError(
                f"|g|/2pi = {target / TWO_PI / 1e6:.3f} MHz exceeds the "
                f"{self.max_abs_g / TWO_PI / 1e6:.3f} MHz reachable on the branch"
            )
        if target == 0.0:
            return self.omega_c_zero
        lo, hi = self.omega_c_min, self.omega_c_zero
        f = lambda wc: self.g_eff(wc) + target  # zero of g_eff = -|g_target|
        flo = f(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if abs(fm) < G_TOLERANCE:
                return mid
            if flo * fm <= 0.0:
                hi = mid
            else:
                lo, flo = mid, fm
        raise CouplingRangeError("bisection failed to meet the coupling tolerance")

    # -- frame calibration --------------------------------------------------

    def idle_offsets(self) -> tuple[float, float]:
        """Bare-frequency offsets referencing the frame to the dressed idle qubits.

        At the calibrated zero crossing the qubits are dressed by the
        idle Lamb shifts lambda_j(omega_c_zero); offsetting the bare
        frequencies by -lambda_j puts the dressed idle transitions at
        zero in the rotating frame, which is where the experiment
        defines the qubit frequency.
        """
        if self.omega_c_zero is None:
            raise CouplingRangeError("this parameter set has no decoupling point to calibrate against")
        return (
            -self.lamb_shift(self.omega_c_zero, 1),
            -self.lamb_shift(self.omega_c_zero, 2),
        )

    def operating_params(self, g_target: float) -> ThreeModeParams:
        """ThreeModeParams at the coupler frequency realizing |g_target|,
        with the idle-compensation offsets applied."""
        b1, b2 = self.idle_offsets()
        wc = self.omega_c_for_g(g_target)
        return ThreeModeParams(
            omega1=self.params.omega1,
            omega2=self.params.omega2,
            omega_c=wc,
            omega_c_ref=self.params.omega_c_ref,
            g12=self.params.g12,
            g1c_ref=self.params.g1c_ref,
            g2c_ref=self.params.g2c_ref,
            gamma=self.params.gamma,
            q1_offset=b1,
            q2_offset=b2,
        )

    def calibration_table(self, n: int = 201) -> np.ndarray:
        """(omega_c, g_eff, lambda_1, lambda_2) rows over the branch (rad/s)."""
        if self.omega_c_zero is None:
            raise CouplingRangeError("this parameter set has no decoupling point to calibrate against")
        grid = np.linspace(self.omega_c_min, self.omega_c_zero, n)
        return np.column_stack(
            [grid, self.g_eff(grid), self.lamb_shift(grid, 1), self.lamb_shift(grid, 2)]
        )
