"""Run configuration: presets, validation, grids and parameter builders.

Configs are plain JSON documents (``schema_version`` field, flat keys).
Frequencies are ordinary Hz (omega/2pi); grids are converted to angular
units by the accessors. Loading collects all violations and reports
them with their field paths.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

import numpy as np

from .coupler import CouplerMap
from .model import TWO_PI, DimerParams, ThreeModeParams

__all__ = ["ConfigError", "RunConfig", "PRESETS", "preset_config"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; message lists every offending field."""


@dataclass
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    model: str = "three-mode"  # "dimer" | "three-mode"

    # device values (Hz)
    gamma_hz: float = 17e6
    omega_hz: float = 5.0e9
    omega_c_ref_hz: float = 7.25e9
    g12_hz: float = 5.9e6
    g1c_ref_hz: float = 112.4e6
    g2c_ref_hz: float = 101.2e6

    # sweep grids
    g_tilde_start: float = 0.05
    g_tilde_stop: float = 2.0
    g_tilde_step: float = 0.05
    time_stop_s: float = 300e-9
    time_step_s: float = 0.5e-9
    sample_step_s: float = 100e-9  # pulsed-readout sampling interval
    detuning_span_hz: float = 40e6
    detuning_step_hz: float = 0.5e6

    # drive / noise
    drive_hz: float | None = None  # resolved to gamma_hz/100
    shots: int = 10_000
    sigma_add: float = 0.01
    assignment_error: float = 0.01
    seed: int | None = None

    # pipeline settings
    smoothing_c_cw: float = 0.4
    smoothing_c_q1: float = 1.5
    smoothing_c_q2: float = 1.0
    filter_cutoff_hz: float = 80e6
    filter_order: int = 4
    t_f_s: float = 100e-9
    q2_sample_step_s: float = 0.5e-9
    q2_sim_step_s: float = 0.1e-9

    # -- construction -------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        problems = []
        for key in data:
            if key not in known:
                problems.append(f"{key}: unknown field")
        cfg = cls(**{k: v for k, v in data.items() if k in known})
        problems.extend(cfg._violations())
        if problems:
            raise ConfigError("; ".join(problems))
        return cfg

    def _violations(self) -> list[str]:
        out = []
        if self.schema_version != SCHEMA_VERSION:
            out.append(f"schema_version: expected {SCHEMA_VERSION}, got {self.schema_version}")
        if self.model not in ("dimer", "three-mode"):
            out.append(f"model: must be 'dimer' or 'three-mode', got {self.model!r}")
        for name in ("gamma_hz", "omega_hz", "omega_c_ref_hz", "g_tilde_step",
                     "time_step_s", "sample_step_s", "detuning_step_hz",
                     "filter_cutoff_hz", "t_f_s", "q2_sample_step_s", "q2_sim_step_s"):
            if not getattr(self, name) > 0:
                out.append(f"{name}: must be positive")
        if self.g_tilde_stop < self.g_tilde_start:
            out.append("g_tilde_stop: must be >= g_tilde_start")
        if self.g_tilde_start < 0:
            out.append("g_tilde_start: must be non-negative")
        if self.time_stop_s <= 0:
            out.append("time_stop_s: must be positive")
        if self.shots < 1:
            out.append("shots: must be at least 1")
        if self.sigma_add < 0:
            out.append("sigma_add: must be non-negative")
        if not 0 <= self.assignment_error < 0.5:
            out.append("assignment_error: must lie in [0, 0.5)")
        if self.filter_order < 1:
            out.append("filter_order: must be at least 1")
        if self.drive_hz is not None and self.drive_hz <= 0:
            out.append("drive_hz: must be positive when given")
        if self.seed is not None and int(self.seed) != self.seed:
            out.append("seed: must be an integer")
        return out

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    # -- grids (angular units / seconds) ------------------------------------

    def g_tilde_grid(self) -> np.ndarray:
        n = int(round((self.g_tilde_stop - self.g_tilde_start) / self.g_tilde_step)) + 1
        return self.g_tilde_start + self.g_tilde_step * np.arange(n)

    def time_grid(self) -> np.ndarray:
        n = int(round(self.time_stop_s / self.time_step_s)) + 1
        return self.time_step_s * np.arange(n)

    def sample_time_grid(self) -> np.ndarray:
        n = int(round(self.time_stop_s / self.sample_step_s)) + 1
        return self.sample_step_s * np.arange(n)

    def q2_time_grid(self) -> np.ndarray:
        n = int(round(self.t_f_s / self.q2_sample_step_s)) + 1
        return self.q2_sample_step_s * np.arange(n)

    def detuning_grid(self) -> np.ndarray:
        n = int(round(self.detuning_span_hz / self.detuning_step_hz))
        return TWO_PI * self.detuning_step_hz * np.arange(-n, n + 1)

    # -- physics builders ----------------------------------------------------

    @property
    def gamma(self) -> float:
        return TWO_PI * self.gamma_hz

    @property
    def drive_strength(self) -> float:
        hz = self.gamma_hz / 100.0 if self.drive_hz is None else self.drive_hz
        return TWO_PI * hz

    def dimer_params(self, g_tilde: float) -> DimerParams:
        return DimerParams.from_g_tilde(g_tilde, gamma_hz=self.gamma_hz)

    def three_mode_base(self) -> ThreeModeParams:
        return ThreeModeParams.from_hz(
            omega_hz=self.omega_hz,
            omega_c_hz=self.omega_c_ref_hz,
            omega_c_ref_hz=self.omega_c_ref_hz,
            g12_hz=self.g12_hz,
            g1c_ref_hz=self.g1c_ref_hz,
            g2c_ref_hz=self.g2c_ref_hz,
            gamma_hz=self.gamma_hz,
        )

    def sweep_map(self) -> CouplerMap:
        """Calibration map for driving the rotating-frame model."""
        return CouplerMap(self.three_mode_base(), counter_rotating=False)

    def formula_map(self) -> CouplerMap:
        """The full effective-coupling map (with counter-rotating terms)."""
        return CouplerMap(self.three_mode_base(), counter_rotating=True)


PRESETS: dict[str, dict] = {
    # device values as fitted in the coupling-calibration figure
    "paper-default": {},
    # alternative reference coupler frequency quoted in the running text
    "paper-maintext-coupler": {"omega_c_ref_hz": 7.29e9},
}


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}; available: {sorted(PRESETS)}")
    return RunConfig.from_dict(PRESETS[name])
