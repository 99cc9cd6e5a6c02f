"""Configuration round-trips, subcommands, CSV contracts, exit codes."""

import json
from dataclasses import replace

import numpy as np
import pytest

from tamedspde import ConfigError, ExperimentConfig, PRESETS
from tamedspde import drift as drift_mod
from tamedspde.cli import main
from tamedspde.config import format_float


TINY = [
    "--set", "discretization.n_modes=16",
    "--set", "discretization.tau_levels=5 6 7",
    "--set", "discretization.fine_level=8",
    "--set", "sampling.n_samples=24",
    "--set", "model.epsilon=0.05",
]


def run_cli(*argv):
    return main(list(argv))


class TestConfig:
    def test_roundtrip_default(self):
        cfg = ExperimentConfig()
        assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg

    def test_roundtrip_modified(self):
        cfg = replace(
            ExperimentConfig(),
            epsilon=0.001, tau_levels=(3, 5, 9), f0_coeffs=(0.25, -1.5),
            coupled=False, directory="some/dir", interface_epsilons=(0.01,),
            phi_norm="l2",
        )
        assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg

    def test_unknown_key_rejected(self):
        text = ExperimentConfig().to_ini().replace(
            "[model]\n", "[model]\nwhatever = 3\n"
        )
        with pytest.raises(ConfigError, match="model.whatever"):
            ExperimentConfig.from_ini(text)

    def test_validation_paths(self):
        with pytest.raises(ConfigError, match="model.epsilon"):
            replace(ExperimentConfig(), epsilon=2.0).validate()
        with pytest.raises(ConfigError, match="discretization.tau_levels"):
            replace(ExperimentConfig(), tau_levels=(15,)).validate()
        with pytest.raises(ConfigError, match="taming.alpha"):
            replace(ExperimentConfig(), alpha=3.0).validate()
        with pytest.raises(ConfigError, match="sampling.phi_norm"):
            replace(ExperimentConfig(), phi_norm="h1").validate()

    def test_override(self):
        cfg = ExperimentConfig().with_override("taming.beta", "100")
        assert cfg.beta == 100.0
        with pytest.raises(ConfigError, match="unknown option"):
            ExperimentConfig().with_override("taming.gamma", "1")

    def test_presets_exist(self):
        assert set(PRESETS) == {
            "paper7-beta5", "paper7-beta100", "paper7-beta5-ci",
            "interface-eps2", "interface-eps3",
        }
        for cfg in PRESETS.values():
            cfg.validate()

    def test_preset_parameters(self):
        beta100 = PRESETS["paper7-beta100"]
        assert beta100.beta == 100.0
        assert beta100.tau_levels == (5, 6, 7, 8, 9)
        assert beta100.phi_norm == "l2"
        assert PRESETS["paper7-beta5"].phi_norm == "nodal"
        eps3 = PRESETS["interface-eps3"]
        assert eps3.epsilon == 0.001
        assert eps3.tau_levels == (10,)
        ci = PRESETS["paper7-beta5-ci"]
        assert ci.n_samples == 200
        assert ci.fine_level == 12


class TestVerifyCommand:
    def test_passes_on_default_drift(self, tmp_path, capsys):
        code = run_cli("verify", "--out-dir", str(tmp_path))
        assert code == 0
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["all_passed"]
        assert report["constants"]["certified"]
        assert report["constants"]["c0"] == 0.5
        assert len(report["checks"]) == 5
        assert all(c["n_samples"] > 0 for c in report["checks"])
        assert "property suite passed" in capsys.readouterr().out

    def test_broken_taming_exits_one(self, tmp_path, monkeypatch):
        monkeypatch.setattr(
            drift_mod, "_taming_denominator",
            lambda x, alpha: np.full_like(np.asarray(x, dtype=float), 0.5),
        )
        code = run_cli("verify", "--out-dir", str(tmp_path))
        assert code == 1
        report = json.loads((tmp_path / "verify_report.json").read_text())
        bad = next(c for c in report["checks"]
                   if c["name"] == "taming_domination")
        assert not bad["passed"]
        assert "u" in bad["counterexample"]


class TestConvergeCommand:
    def test_tiny_run_schema_and_replay(self, tmp_path):
        out1 = tmp_path / "a"
        code = run_cli("converge", *TINY, "--out-dir", str(out1))
        assert code == 0
        csv = (out1 / "errors.csv").read_text()
        lines = csv.strip().split("\n")
        assert lines[0] == ("level,tau,weak_error,mc_halfwidth,n_samples,"
                            "admissible,admissibility_ratio")
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "5"
        assert first[1] == format_float(2.0**-5)
        assert first[5] in ("true", "false")
        # every float cell reparses to a value that reformats identically
        for line in lines[1:]:
            for cell in line.split(",")[1:5]:
                assert format_float(float(cell)) == cell

        fit = json.loads((out1 / "rate_fit.json").read_text())
        assert {"slope", "intercept", "residual", "n_rows"} <= set(fit)

        manifest = json.loads((out1 / "manifest.json").read_text())
        assert manifest["command"] == "converge"
        assert len(manifest["admissibility"]) == 3

        # byte-identical replay from the resolved config, more threads
        out2 = tmp_path / "b"
        code = run_cli(
            "converge", "--config", str(out1 / "config.resolved.ini"),
            "--out-dir", str(out2), "--threads", "4",
        )
        assert code == 0
        assert (out2 / "errors.csv").read_bytes() == (out1 / "errors.csv").read_bytes()

    def test_manifest_is_a_valid_config_source(self, tmp_path):
        out1 = tmp_path / "a"
        assert run_cli("converge", *TINY, "--out-dir", str(out1)) == 0
        out2 = tmp_path / "b"
        assert run_cli(
            "converge", "--config", str(out1 / "manifest.json"),
            "--out-dir", str(out2),
        ) == 0
        assert (out2 / "errors.csv").read_bytes() == (out1 / "errors.csv").read_bytes()

    def test_single_tau_refuses_fit(self, tmp_path, capsys):
        code = run_cli(
            "converge", "--set", "discretization.n_modes=16",
            "--set", "discretization.tau_levels=6",
            "--set", "discretization.fine_level=8",
            "--set", "sampling.n_samples=8",
            "--set", "model.epsilon=0.05",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        assert "rate fit refused" in capsys.readouterr().out
        assert not (tmp_path / "rate_fit.json").exists()
        assert (tmp_path / "errors.csv").exists()

    def test_uncoupled_mode_runs(self, tmp_path):
        code = run_cli("converge", *TINY, "--set", "sampling.coupled=false",
                       "--set", "sampling.n_samples=16",
                       "--out-dir", str(tmp_path))
        assert code == 0
        rows = (tmp_path / "errors.csv").read_text().strip().split("\n")[1:]
        assert all(np.isfinite(float(r.split(",")[2])) for r in rows)

    def test_bad_config_exits_one(self, tmp_path, capsys):
        code = run_cli("converge", "--set", "model.epsilon=7",
                       "--out-dir", str(tmp_path))
        assert code == 1
        assert "model.epsilon" in capsys.readouterr().err

    def test_conflicting_sources_rejected(self, tmp_path):
        cfg_file = tmp_path / "c.ini"
        cfg_file.write_text(ExperimentConfig().to_ini())
        code = run_cli("converge", "--preset", "paper7-beta5",
                       "--config", str(cfg_file))
        assert code == 1


class TestTable1Command:
    def test_tiny_grid_shape(self, tmp_path):
        code = run_cli("table1", *TINY, "--out-dir", str(tmp_path))
        assert code == 0
        lines = (tmp_path / "table1.csv").read_text().strip().split("\n")
        assert lines[0] == ("level,tau,err_alpha_1,err_alpha_1_2,"
                            "err_alpha_1_3,err_alpha_1_4")
        assert len(lines) == 4  # three tau levels
        assert all(len(line.split(",")) == 6 for line in lines[1:])
        fits = json.loads((tmp_path / "table1_fits.json").read_text())
        assert set(fits["monotone"]) == {
            "err_alpha_1", "err_alpha_1_2", "err_alpha_1_3", "err_alpha_1_4"
        }


class TestInterfaceCommand:
    def test_profiles_schema(self, tmp_path):
        code = run_cli(
            "interface", "--preset", "interface-eps2",
            "--set", "sampling.n_samples=12",
            "--set", "interface.times=0.0 0.5 1.0",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "profiles_eps_0.01.csv").read_text().strip().split("\n")
        assert lines[0] == "time,node_index,x,mean_value"
        assert len(lines) == 1 + 3 * 64
        # the t = 0 rows are exactly sin(pi x_i)
        for i, line in enumerate(lines[1:65]):
            cells = line.split(",")
            assert cells[0] == format_float(0.0)
            assert int(cells[1]) == i + 1
            x = float(cells[2])
            assert float(cells[3]) == pytest.approx(np.sin(np.pi * x),
                                                    abs=1e-12)

    def test_two_epsilon_run_emits_two_file_sets(self, tmp_path):
        code = run_cli(
            "interface", "--preset", "interface-eps2",
            "--set", "sampling.n_samples=6",
            "--set", "interface.times=0.0 1.0",
            "--set", "interface.epsilons=0.01 0.001",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        assert (tmp_path / "profiles_eps_0.01.csv").exists()
        assert (tmp_path / "profiles_eps_0.001.csv").exists()

    def test_blowup_exits_two(self, tmp_path, capsys):
        code = run_cli(
            "interface", "--preset", "interface-eps3",
            "--set", "discretization.horizon=16",
            "--set", "discretization.tau_levels=8",
            "--set", "discretization.fine_level=8",
            "--set", "interface.times=0.0 16.0",
            "--set", "sampling.n_samples=8",
            "--seed", "20250811",
            "--out-dir", str(tmp_path),
        )
        assert code == 2
        assert "blow-up" in capsys.readouterr().err


class TestMomentsCommand:
    def test_schema_and_growth_ratio(self, tmp_path):
        code = run_cli(
            "moments", "--set", "discretization.n_modes=16",
            "--set", "moments.horizons=0.5 1.0",
            "--set", "moments.n_samples=16",
            "--set", "moments.tau_level=6",
            "--set", "model.epsilon=0.05",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        for name in ("moments_T_0.5.csv", "moments_T_1.csv"):
            lines = (tmp_path / name).read_text().strip().split("\n")
            assert lines[0] == "time,mean_l2_sq,mean_l4_4,mean_sup"
            values = np.array([[float(c) for c in l.split(",")]
                               for l in lines[1:]])
            assert np.all(np.isfinite(values))
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert len(manifest["maxima"]) == 2
        assert len(manifest["growth_ratios"]) == 1
        ratio = manifest["growth_ratios"][0]["l2_sq_ratio"]
        assert ratio >= 1.0


class TestFlagsAndHelp:
    def test_unknown_preset_rejected(self):
        with pytest.raises(SystemExit):
            main(["converge", "--preset", "nope"])

    def test_seed_flag_changes_bytes(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli("converge", *TINY, "--seed", "1",
                       "--out-dir", str(out1)) == 0
        assert run_cli("converge", *TINY, "--seed", "2",
                       "--out-dir", str(out2)) == 0
        assert (out1 / "errors.csv").read_bytes() != (out2 / "errors.csv").read_bytes()
