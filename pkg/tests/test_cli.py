import json
from pathlib import Path

import numpy as np
import pytest

from ptdimer.cli import main, read_trace_csv
from ptdimer.config import ConfigError, RunConfig, preset_config


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.fixture()
def fast_config(tmp_path):
    # small grids so command tests stay quick
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "g_tilde_start": 0.25,
        "g_tilde_stop": 2.0,
        "g_tilde_step": 0.25,
        "time_stop_s": 200e-9,
        "time_step_s": 2e-9,
        "detuning_span_hz": 30e6,
        "detuning_step_hz": 1.5e6,
    }))
    return path


class TestConfig:
    def test_defaults_valid(self):
        cfg = RunConfig()
        assert not cfg._violations()

    def test_unknown_field_reported_with_path(self):
        with pytest.raises(ConfigError, match="gamma_mhz"):
            RunConfig.from_dict({"gamma_mhz": 17.0})

    def test_violations_carry_field_names(self):
        with pytest.raises(ConfigError) as err:
            RunConfig.from_dict({"gamma_hz": -1.0, "shots": 0})
        assert "gamma_hz" in str(err.value)
        assert "shots" in str(err.value)

    def test_hash_stable_and_sensitive(self):
        a, b = RunConfig(), RunConfig()
        assert a.sha256() == b.sha256()
        c = RunConfig(gamma_hz=18e6)
        assert c.sha256() != a.sha256()

    def test_presets(self):
        assert preset_config("paper-default").omega_c_ref_hz == 7.25e9
        assert preset_config("paper-maintext-coupler").omega_c_ref_hz == 7.29e9
        with pytest.raises(ConfigError):
            preset_config("nope")

    def test_grids(self):
        cfg = RunConfig()
        g = cfg.g_tilde_grid()
        assert g[0] == pytest.approx(0.05) and g[-1] == pytest.approx(2.0)
        d = cfg.detuning_grid()
        assert len(d) % 2 == 1 and d[len(d) // 2] == 0.0


class TestCommands:
    def test_spectrum_outputs(self, tmp_path, fast_config):
        out = tmp_path / "spec"
        assert run_cli("spectrum", "--config", fast_config, "--out", out) == 0
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert "eigenenergies.csv" in manifest["outputs"]
        assert (out / "fig_eigenenergies.png").exists()
        header = (out / "eigenenergies.csv").read_text().splitlines()
        assert header[0].startswith("# config_sha256=")
        assert header[1] == "# seed=none"

    def test_dynamics_cross_engine_diff_reported(self, tmp_path, fast_config):
        out = tmp_path / "dyn"
        assert run_cli("dynamics", "--config", fast_config, "--out", out,
                       "--no-figures") == 0
        manifest = json.loads((out / "run_manifest.json").read_text())
        diffs = manifest["metrics"]["max_abs_engine_diff"]
        assert max(diffs.values()) < 1e-6
        trace = read_trace_csv(out / "traces" / "population_g1.0000.csv")
        assert trace.values[0] == pytest.approx(1.0)

    def test_fit_round_trip_and_determinism(self, tmp_path, fast_config):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert run_cli("fit", "--config", fast_config, "--seed", 7,
                           "--out", out) == 0
        for name in sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file()):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
        manifest = json.loads((out_a / "run_manifest.json").read_text())
        assert manifest["metrics"]["median_rel_g_error"] < 0.02
        assert manifest["seed"] == 7

    def test_fit_requires_seed(self, tmp_path, fast_config, capsys):
        code = run_cli("fit", "--config", fast_config, "--out", tmp_path / "x")
        assert code == 2
        assert "seed" in capsys.readouterr().err

    def test_fit_from_trace_file(self, tmp_path, fast_config):
        dyn = tmp_path / "dyn"
        run_cli("dynamics", "--config", fast_config, "--out", dyn, "--no-figures")
        out = tmp_path / "fit"
        assert run_cli("fit", "--config", fast_config, "--out", out,
                       "--input", dyn / "traces" / "coherence_g1.5000.csv",
                       "--observable", "coherence") == 0
        manifest = json.loads((out / "run_manifest.json").read_text())
        info = manifest["metrics"]["coherence_g1.5000.csv"]
        assert info["converged"]
        assert info["g_tilde_hat"] == pytest.approx(1.5, rel=1e-6)

    def test_bad_config_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"model": "four-mode"}))
        assert run_cli("spectrum", "--config", bad, "--out", tmp_path / "o") == 2
        assert "model" in capsys.readouterr().err

    def test_verify_passes(self, fast_config):
        assert run_cli("verify", "--config", fast_config) == 0

    def test_workers_do_not_change_results(self, tmp_path, fast_config):
        out1, out4 = tmp_path / "w1", tmp_path / "w4"
        run_cli("fit", "--config", fast_config, "--seed", 3, "--out", out1,
                "--workers", 1, "--no-figures")
        run_cli("fit", "--config", fast_config, "--seed", 3, "--out", out4,
                "--workers", 4, "--no-figures")
        assert (out1 / "fits.csv").read_bytes() == (out4 / "fits.csv").read_bytes()
