"""Batch command-line front end.

Each subcommand produces one family of results as CSV files
(full-precision decimals, one header row, ``#``-prefixed comment lines
carrying the config hash and seed), a JSON run manifest, and a rendered
PNG next to the data. Identical config and seed give byte-identical
outputs.

    ptdimer spectrum      eigenenergy branches vs relative coupling
    ptdimer dynamics      dimer time traces from all three engines
    ptdimer transmission  steady-state S21 maps from the three-mode model
    ptdimer sensitivity   cw / q1 / q2 sensitivity pipelines
    ptdimer fit           synthetic round-trip fits, or fits of trace CSVs
    ptdimer verify        fast invariant suite (fails on first violation)
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import plots
from . import signal as sig
from .config import ConfigError, RunConfig
from .dynamics import (
    TimeTrace,
    dimer_engine_traces,
    q1_population_analytic,
    q2_coherence_analytic,
    simulate_q2_emission_sweep,
    transmission_spectrum,
)
from .estimation import fit_coherence, fit_population, peak_splitting, synth_population
from .model import DriveParams, dimer_eigenvalues

__all__ = ["main"]


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path: Path, columns: list[str], rows, cfg: RunConfig, seed) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# config_sha256={cfg.sha256()}\n")
        fh.write(f"# seed={'none' if seed is None else seed}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def read_trace_csv(path: Path) -> TimeTrace:
    """Read a trace in the emitted schema (t_or_detuning, re, im, abs)."""
    rows = []
    with open(path) as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                expected = ["t_or_detuning", "re", "im", "abs"]
                if header != expected:
                    raise ValueError(f"{path}: expected columns {expected}, got {header}")
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows)
    if data.size == 0:
        raise ValueError(f"{path}: no samples")
    return TimeTrace(times=data[:, 0], values=data[:, 3])


class Manifest:
    def __init__(self, command: str, cfg: RunConfig, seed):
        self.data = {
            "command": command,
            "schema_version": cfg.schema_version,
            "config": cfg.to_dict(),
            "config_sha256": cfg.sha256(),
            "seed": seed,
            "outputs": [],
            "metrics": {},
        }

    def add_output(self, path: Path, outdir: Path):
        self.data["outputs"].append(str(path.relative_to(outdir)))

    def write(self, outdir: Path) -> Path:
        path = outdir / "run_manifest.json"
        with open(path, "w", newline="\n") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _executor_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(cfg: RunConfig, outdir: Path, seed, workers: int, figures: bool) -> int:
    manifest = Manifest("spectrum", cfg, seed)
    grid = cfg.g_tilde_grid()
    rows = []
    eps_m = []
    for gt in grid:
        p = cfg.dimer_params(gt)
        m1, m2 = dimer_eigenvalues(p)
        d1, d2 = dimer_eigenvalues(p, doubled=True)
        eps_m.append((m1, m2))
        rows.append(
            (gt, m1.real, m1.imag, m2.real, m2.imag, d1.real, d1.imag, d2.real, d2.imag)
        )
    columns = [
        "g_tilde",
        "re_eps1_matrix_rad_s", "im_eps1_matrix_rad_s",
        "re_eps2_matrix_rad_s", "im_eps2_matrix_rad_s",
        "re_eps1_doubled_rad_s", "im_eps1_doubled_rad_s",
        "re_eps2_doubled_rad_s", "im_eps2_doubled_rad_s",
    ]
    manifest.add_output(write_csv(outdir / "eigenenergies.csv", columns, rows, cfg, seed), outdir)
    if figures:
        eps = np.array(eps_m)
        fig = outdir / "fig_eigenenergies.png"
        plots.save_eigenenergy_figure(fig, grid, eps[:, 0], eps[:, 1], cfg.gamma)
        manifest.add_output(fig, outdir)
    manifest.write(outdir)
    print(f"spectrum: {len(grid)} couplings -> {outdir}")
    return 0


def cmd_dynamics(cfg: RunConfig, outdir: Path, seed, workers: int, figures: bool) -> int:
    manifest = Manifest("dynamics", cfg, seed)
    grid = cfg.g_tilde_grid()
    times = cfg.time_grid()
    results = _executor_map(
        lambda gt: dimer_engine_traces(cfg.dimer_params(gt), times), grid, workers
    )

    diffs = {"population_propagator": 0.0, "population_lindblad": 0.0,
             "coherence_propagator": 0.0, "coherence_lindblad": 0.0}
    for obs in ("population", "coherence"):
        rows = []
        for gt, tr in zip(grid, results):
            for k, t in enumerate(times):
                rows.append((gt, t, tr[f"{obs}_analytic"][k],
                             tr[f"{obs}_propagator"][k], tr[f"{obs}_lindblad"][k]))
            for engine in ("propagator", "lindblad"):
                gap = float(np.max(np.abs(tr[f"{obs}_{engine}"] - tr[f"{obs}_analytic"])))
                diffs[f"{obs}_{engine}"] = max(diffs[f"{obs}_{engine}"], gap)
        path = write_csv(
            outdir / f"{obs}_engines.csv",
            ["g_tilde", "t_s", "analytic", "propagator", "lindblad"],
            rows, cfg, seed,
        )
        manifest.add_output(path, outdir)

    # interoperable single-trace files (analytic engine)
    for gt, tr in zip(grid, results):
        for obs, key in (("population", "population_analytic"), ("coherence", "coherence_analytic")):
            vals = tr[key]
            rows = [(t, v, 0.0, abs(v)) for t, v in zip(times, vals)]
            path = write_csv(
                outdir / "traces" / f"{obs}_g{gt:.4f}.csv",
                ["t_or_detuning", "re", "im", "abs"], rows, cfg, seed,
            )
            manifest.add_output(path, outdir)

    manifest.data["metrics"]["max_abs_engine_diff"] = diffs
    if figures:
        pop = np.array([tr["population_analytic"] for tr in results])
        coh = np.array([tr["coherence_analytic"] for tr in results])
        fig = outdir / "fig_dynamics.png"
        plots.save_dynamics_figure(fig, times, grid, pop, coh)
        manifest.add_output(fig, outdir)
    manifest.write(outdir)
    worst = max(diffs.values())
    print(f"dynamics: {len(grid)} couplings, cross-engine max diff {worst:.3e} -> {outdir}")
    return 0


def _transmission_magnitudes(cfg: RunConfig, grid, detunings, workers: int):
    cmap = cfg.sweep_map()

    def one(gt):
        p = cmap.operating_params(gt * cfg.gamma / 4.0)
        d = DriveParams.resonant(p, cfg.drive_strength)
        return transmission_spectrum(p, d, detunings)

    return cmap, _executor_map(one, grid, workers)


def cmd_transmission(cfg: RunConfig, outdir: Path, seed, workers: int, figures: bool) -> int:
    manifest = Manifest("transmission", cfg, seed)
    grid = cfg.g_tilde_grid()
    detunings = cfg.detuning_grid()
    cmap, spectra = _transmission_magnitudes(cfg, grid, detunings, workers)

    rows = []
    for gt, spec in zip(grid, spectra):
        for dp, s in zip(detunings, spec.s21):
            rows.append((gt, dp, s.real, s.imag, abs(s)))
    path = write_csv(
        outdir / "transmission.csv",
        ["g_tilde", "delta_p_rad_s", "re", "im", "abs"], rows, cfg, seed,
    )
    manifest.add_output(path, outdir)

    table = cmap.calibration_table()
    path = write_csv(
        outdir / "coupler_calibration.csv",
        ["omega_c_rad_s", "g_eff_rad_s", "lamb_shift_q1_rad_s", "lamb_shift_q2_rad_s"],
        table, cfg, seed,
    )
    manifest.add_output(path, outdir)

    try:
        top = peak_splitting(spectra[-1])
        manifest.data["metrics"]["dip_splitting_at_max_g_rad_s"] = top
        manifest.data["metrics"]["dip_splitting_over_2g"] = top / (2 * grid[-1] * cfg.gamma / 4)
    except ValueError:
        manifest.data["metrics"]["dip_splitting_at_max_g_rad_s"] = None

    if figures:
        mags = np.array([np.abs(s.s21) for s in spectra])
        fig = outdir / "fig_transmission.png"
        plots.save_transmission_figure(fig, detunings, grid, mags)
        manifest.add_output(fig, outdir)
    manifest.write(outdir)
    print(f"transmission: {len(grid)} x {len(detunings)} steady states -> {outdir}")
    return 0


def _write_sensitivity_outputs(cfg, outdir, manifest, seed, curve, deriv, axis_values,
                               axis_column, tag, figures):
    rows = [
        (gt, e, en, am)
        for gt, e, en, am in zip(curve.g_tilde, curve.eta, curve.normalized(), curve.argmax_axis)
    ]
    path = write_csv(
        outdir / f"sensitivity_{tag}.csv",
        ["g_tilde", "eta", "eta_normalized", f"argmax_{axis_column}"],
        rows, cfg, seed,
    )
    manifest.add_output(path, outdir)

    rows = []
    for i, gt in enumerate(curve.g_tilde):
        for j, ax in enumerate(axis_values):
            rows.append((gt, ax, deriv[i, j]))
    path = write_csv(
        outdir / f"derivative_field_{tag}.csv",
        ["g_tilde", axis_column, "d_signal_d_g_tilde"], rows, cfg, seed,
    )
    manifest.add_output(path, outdir)

    manifest.data["metrics"][f"{tag}_raw_max"] = curve.raw_max
    manifest.data["metrics"][f"{tag}_argmax_g_tilde"] = float(
        curve.g_tilde[int(np.argmax(curve.eta))]
    )
    if figures:
        fig = outdir / f"fig_sensitivity_{tag}.png"
        plots.save_sensitivity_figure(fig, curve, f"{tag} sensitivity")
        manifest.add_output(fig, outdir)


def cmd_sensitivity(cfg: RunConfig, outdir: Path, seed, workers: int, figures: bool,
                    which: str) -> int:
    manifest = Manifest(f"sensitivity-{which}", cfg, seed)
    grid = cfg.g_tilde_grid()

    if which == "cw":
        detunings = cfg.detuning_grid()
        _, spectra = _transmission_magnitudes(cfg, grid, detunings, workers)
        mags = np.array([np.abs(s.s21) for s in spectra])
        curve = sig.sensitivity_cw(mags, grid, detunings, smoothing_c=cfg.smoothing_c_cw)
        deriv = sig.smoothed_derivative(mags, grid, cfg.smoothing_c_cw)
        _write_sensitivity_outputs(cfg, outdir, manifest, seed, curve, deriv,
                                   detunings, "delta_p_rad_s", "cw", figures)

    elif which == "q1":
        times = cfg.sample_time_grid()
        pops = np.array([
            q1_population_analytic(times, cfg.dimer_params(gt)) for gt in grid
        ])
        curve = sig.sensitivity_q1(
            pops, grid, times, shots=cfg.shots,
            assignment_error=cfg.assignment_error, smoothing_c=cfg.smoothing_c_q1,
        )
        deriv = sig.smoothed_derivative(pops, grid, cfg.smoothing_c_q1)
        _write_sensitivity_outputs(cfg, outdir, manifest, seed, curve, deriv,
                                   times, "t_s", "q1", figures)

    elif which == "q2":
        times = cfg.q2_time_grid()
        sweep = simulate_q2_emission_sweep(
            cfg.sweep_map(), grid, times, sim_dt=cfg.q2_sim_step_s,
            cutoff_hz=cfg.filter_cutoff_hz, filter_order=cfg.filter_order,
        )
        curve = sig.sensitivity_q2(
            sweep.filtered, grid, times, t_f=cfg.t_f_s, smoothing_c=cfg.smoothing_c_q2
        )
        deriv = sig.smoothed_derivative(sweep.filtered, grid, cfg.smoothing_c_q2)
        _write_sensitivity_outputs(cfg, outdir, manifest, seed, curve, deriv,
                                   times, "t_s", "q2", figures)

        # analytic two-mode reference through the identical pipeline
        coh2 = np.array([
            q2_coherence_analytic(times, cfg.dimer_params(gt)) for gt in grid
        ])
        curve2 = sig.sensitivity_q2(coh2, grid, times, t_f=cfg.t_f_s,
                                    smoothing_c=cfg.smoothing_c_q2)
        rows = list(zip(grid, curve2.eta, curve2.normalized(), curve2.argmax_axis))
        path = write_csv(
            outdir / "sensitivity_q2_two_mode.csv",
            ["g_tilde", "eta", "eta_normalized", "argmax_t_s"], rows, cfg, seed,
        )
        manifest.add_output(path, outdir)
        window = (grid >= 1.0) & (grid <= 2.0)
        if np.any(window):
            dev = np.abs(curve.eta[window] - curve2.eta[window]) / np.where(
                curve2.eta[window] > 0, curve2.eta[window], 1.0
            )
            manifest.data["metrics"]["three_vs_two_mode_max_rel_dev_1_2"] = float(dev.max())
    else:
        raise ConfigError(f"which: unknown sensitivity pipeline {which!r}")

    manifest.write(outdir)
    print(f"sensitivity {which}: argmax g_tilde = "
          f"{manifest.data['metrics'][f'{which}_argmax_g_tilde']:.3f} -> {outdir}")
    return 0


def cmd_fit(cfg: RunConfig, outdir: Path, seed, workers: int, figures: bool,
            inputs: list[Path], observable: str) -> int:
    manifest = Manifest("fit", cfg, seed)
    columns = [
        "g_tilde_true", "g_true_rad_s", "gamma_true_rad_s",
        "g_hat_rad_s", "gamma_hat_rad_s", "g_tilde_hat", "residual_rms",
        "var_g", "var_gamma", "cov_g_gamma",
        "re_eps1_matrix_rad_s", "im_eps1_matrix_rad_s",
        "re_eps2_matrix_rad_s", "im_eps2_matrix_rad_s",
        "re_eps1_doubled_rad_s", "im_eps1_doubled_rad_s",
        "re_eps2_doubled_rad_s", "im_eps2_doubled_rad_s",
        "converged",
    ]

    def result_row(fit, gt_true=np.nan, g_true=np.nan, gamma_true=np.nan):
        return (
            gt_true, g_true, gamma_true,
            fit.g_hat, fit.gamma_hat,
            fit.g_tilde_hat if np.isfinite(fit.gamma_hat) else np.nan,
            fit.residual_rms,
            fit.covariance[0, 0], fit.covariance[1, 1], fit.covariance[0, 1],
            fit.eps1.real, fit.eps1.imag, fit.eps2.real, fit.eps2.imag,
            2 * fit.eps1.real, 2 * fit.eps1.imag, 2 * fit.eps2.real, 2 * fit.eps2.imag,
            fit.converged,
        )

    rows = []
    if inputs:
        fit_fn = fit_population if observable == "population" else fit_coherence
        for path in inputs:
            trace = read_trace_csv(Path(path))
            fit = fit_fn(trace)
            rows.append(result_row(fit))
            manifest.data["metrics"][Path(path).name] = {
                "g_tilde_hat": None if not np.isfinite(fit.gamma_hat) else fit.g_tilde_hat,
                "converged": fit.converged,
            }
    else:
        if seed is None:
            raise ConfigError("seed: required for synthetic round-trip fits")
        grid = [gt for gt in cfg.g_tilde_grid() if gt > 0.02]
        times = cfg.time_grid()[::4]  # 2 ns sampling is plenty for fitting

        def one(item):
            index, gt = item
            p = cfg.dimer_params(gt)
            trace = synth_population(p, times, cfg.shots, seed=[int(seed), index])
            return p, fit_population(trace, shots=cfg.shots)

        results = _executor_map(one, list(enumerate(grid)), workers)
        for gt, (p, fit) in zip(grid, results):
            rows.append(result_row(fit, gt, p.g, p.gamma))
        err = [abs(f.g_hat - p.g) / p.g for p, f in results]
        manifest.data["metrics"]["median_rel_g_error"] = float(np.median(err))
        manifest.data["metrics"]["all_converged"] = bool(all(f.converged for _, f in results))

    path = write_csv(outdir / "fits.csv", columns, rows, cfg, seed)
    manifest.add_output(path, outdir)

    if figures and not inputs:
        fig = outdir / "fig_fits.png"
        plots.save_fit_figure(
            fig,
            np.array([r[0] for r in rows]),
            np.array([r[5] for r in rows]),
        )
        manifest.add_output(fig, outdir)
    manifest.write(outdir)
    print(f"fit: {len(rows)} traces -> {outdir}")
    return 0


# ---------------------------------------------------------------------------
# verify


def _verify_checks(cfg: RunConfig):
    from . import dynamics as dyn
    from .coupler import CouplerMap
    from .linalg import eig2x2, expm, kron, solve_linear
    from .model import (
        SIGMA_MINUS,
        SIGMA_X,
        ThreeModeParams,
        dimer_hamiltonian_1exc,
        dimer_hamiltonian_full,
        psi_q1_excited,
        three_mode_hamiltonian_lab,
    )

    rng = np.random.default_rng(0)

    def random_c(shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    def check_expm_inverse():
        a = random_c((6, 6))
        a *= 10.0 / np.linalg.norm(a)
        return np.max(np.abs(expm(a) @ expm(-a) - np.eye(6))) < 1e-10

    def check_kron_associative():
        a, b, c = random_c((2, 2)), random_c((2, 2)), random_c((2, 2))
        return np.allclose(kron(a, kron(b, c)), kron(kron(a, b), c), atol=1e-12)

    def check_solve_residual():
        a = random_c((64, 64)) + 10.0 * np.eye(64)
        b = random_c(64)
        x = solve_linear(a, b)
        return np.linalg.norm(a @ x - b) < 1e-10 * np.linalg.norm(b)

    def check_ep_degeneracy():
        p = cfg.dimer_params(1.0)
        l1, l2 = eig2x2(dimer_hamiltonian_1exc(p))
        return abs(l1 - l2) < 1e-10 * p.gamma

    def check_engine_agreement():
        times = np.arange(0.0, 300e-9, 2e-9)
        for gt in (0.5, 1.5):
            tr = dyn.dimer_engine_traces(cfg.dimer_params(gt), times)
            if np.max(np.abs(tr["population_propagator"] - tr["population_analytic"])) > 1e-8:
                return False
            if np.max(np.abs(tr["population_lindblad"] - tr["population_analytic"])) > 1e-6:
                return False
        return True

    def check_lindblad_single_qubit():
        times = np.arange(0.0, 300e-9, 2e-9)
        traj = dyn.lindblad_evolve(
            np.zeros((2, 2)), [(cfg.gamma, SIGMA_MINUS)],
            np.diag([1.0, 0.0]).astype(complex), times,
            observables_map={"pe": np.diag([1.0, 0.0])},
        )
        ok = np.max(np.abs(traj.expectations["pe"].real - np.exp(-cfg.gamma * times))) < 1e-10
        traces = [abs(np.trace(r) - 1.0) for r in traj.states]
        return ok and max(traces) < 1e-9

    def check_norm_non_increasing():
        p = cfg.dimer_params(1.3)
        traj = dyn.evolve_nonhermitian(
            dimer_hamiltonian_full(p), psi_q1_excited(), np.arange(0.0, 300e-9, 2e-9)
        )
        return bool(np.all(np.diff(np.linalg.norm(traj.states, axis=1)) <= 1e-12))

    def check_coupler_round_trip():
        cmap = cfg.sweep_map()
        for gt in (0.1, 1.0, 2.5):
            g = gt * cfg.gamma / 4
            if abs(abs(cmap.g_eff(cmap.omega_c_for_g(g))) - g) > 2 * np.pi * 1e3:
                return False
        return True

    def check_lab_splitting():
        cmap = cfg.formula_map()
        b1, b2 = cmap.idle_offsets()
        base = cfg.three_mode_base()
        for g_mhz in (2.0, 8.5):
            g = 2 * np.pi * g_mhz * 1e6
            wc = cmap.omega_c_for_g(g)
            p = ThreeModeParams(
                omega1=base.omega1, omega2=base.omega2, omega_c=wc,
                omega_c_ref=base.omega_c_ref, g12=base.g12,
                g1c_ref=base.g1c_ref, g2c_ref=base.g2c_ref, gamma=base.gamma,
                q1_offset=b1, q2_offset=b2,
            )
            evals, evecs = np.linalg.eigh(three_mode_hamiltonian_lab(p))
            w = np.abs(evecs[3, :]) ** 2 + np.abs(evecs[6, :]) ** 2
            i, j = np.argsort(w)[-2:]
            if abs(abs(evals[i] - evals[j]) - 2 * g) > 0.05 * 2 * g:
                return False
        return True

    def check_extinction():
        cmap = cfg.sweep_map()
        p = cmap.operating_params(0.0)
        spec = dyn.transmission_spectrum(
            p, DriveParams.resonant(p, cfg.drive_strength), np.array([0.0])
        )
        return abs(spec.s21[0]) < 0.01

    def check_smoothing_mass():
        y = np.full(32, 2.5)
        return np.allclose(sig.gaussian_smooth(y, 3.0), y, rtol=1e-12)

    def check_butterworth_dc():
        y = np.full(256, 0.7)
        out = sig.butterworth_lowpass(y, 1e-9, cfg.filter_cutoff_hz, cfg.filter_order)
        return np.allclose(out, y, atol=1e-9)

    return [
        ("linalg.expm inverse identity", check_expm_inverse),
        ("linalg.kron associativity", check_kron_associative),
        ("linalg.solve residual bound", check_solve_residual),
        ("model EP degeneracy", check_ep_degeneracy),
        ("dynamics engine agreement", check_engine_agreement),
        ("dynamics Lindblad amplitude damping", check_lindblad_single_qubit),
        ("dynamics norm non-increasing", check_norm_non_increasing),
        ("coupler inverse-map round trip", check_coupler_round_trip),
        ("coupler lab-frame splitting vs formula", check_lab_splitting),
        ("transmission single-emitter extinction", check_extinction),
        ("signal smoothing unit mass", check_smoothing_mass),
        ("signal Butterworth DC gain", check_butterworth_dc),
    ]


def cmd_verify(cfg: RunConfig) -> int:
    for name, check in _verify_checks(cfg):
        try:
            ok = check()
        except Exception as exc:  # a crash is a failure with context
            print(f"FAIL {name}: {exc}")
            return 1
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok:
            return 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptdimer",
        description="Passive PT-dimer / waveguide-QED simulator",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--preset", default="paper-default", help="named preset")
    common.add_argument("--seed", type=int, help="noise seed (overrides config)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--workers", type=int, default=1, help="sweep worker count")
    common.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="eigenenergy branches")
    sub.add_parser("dynamics", parents=[common], help="dimer time dynamics")
    sub.add_parser("transmission", parents=[common], help="S21 sweeps")
    p_sens = sub.add_parser("sensitivity", parents=[common], help="sensitivity pipelines")
    p_sens.add_argument("which", choices=["cw", "q1", "q2"])
    p_fit = sub.add_parser("fit", parents=[common], help="parameter estimation")
    p_fit.add_argument("--input", type=Path, action="append", default=[],
                       help="trace CSV to fit (repeatable); omit for synthetic round trips")
    p_fit.add_argument("--observable", choices=["population", "coherence"],
                       default="population")
    sub.add_parser("verify", parents=[common], help="invariant suite")
    return parser


def _load_config(args) -> RunConfig:
    from .config import PRESETS

    if args.preset not in PRESETS:
        raise ConfigError(f"preset: unknown preset {args.preset!r}; available: {sorted(PRESETS)}")
    merged = dict(PRESETS[args.preset])
    if args.config is not None:
        with open(args.config) as fh:
            merged.update(json.load(fh))
    return RunConfig.from_dict(merged)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    seed = args.seed if args.seed is not None else cfg.seed
    outdir = args.out if args.out is not None else Path("ptdimer_out") / args.command
    figures = not args.no_figures

    if args.command != "verify":
        outdir.mkdir(parents=True, exist_ok=True)

    try:
        if args.command == "spectrum":
            return cmd_spectrum(cfg, outdir, seed, args.workers, figures)
        if args.command == "dynamics":
            return cmd_dynamics(cfg, outdir, seed, args.workers, figures)
        if args.command == "transmission":
            return cmd_transmission(cfg, outdir, seed, args.workers, figures)
        if args.command == "sensitivity":
            return cmd_sensitivity(cfg, outdir, seed, args.workers, figures, args.which)
        if args.command == "fit":
            return cmd_fit(cfg, outdir, seed, args.workers, figures,
                           args.input, args.observable)
        if args.command == "verify":
            return cmd_verify(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
