"""Tests for the command-line entry point."""

import logging

import pandas as pd
import pytest

from dp_byoa import cli
from dp_byoa.evaluation import CSV_COLUMNS
from dp_byoa.evaluation.stability import StabilityReport
from dp_byoa.routers import experiment_router
from dp_byoa.verify import AcceptanceRow


SC_MIN_TEXT = "kind = sc_min\nseed = 3\nproblem.n = 64\nrepetitions = 2\n"


@pytest.fixture
def write_config(tmp_path):
    """Write config text to a file and return its path as a string."""

    def _write(text, name="experiment.txt"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("DP_BYOA_JOBS", "DP_BYOA_QUICK", "DP_BYOA_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)


class TestExperimentCommands:
    """Test cases for run, sweep and probe."""

    def test_run_writes_artifacts(self, write_config, tmp_path, capsys):
        out = tmp_path / "out"
        code = cli.main(["run", write_config(SC_MIN_TEXT), "--out", str(out)])

        assert code == cli.EXIT_OK
        assert (out / "config.txt").exists()
        assert (out / "run_1.json").exists()
        frame = pd.read_csv(out / "results.csv")
        assert list(frame.columns) == CSV_COLUMNS
        assert str(out / "results.csv") in capsys.readouterr().out

    def test_run_is_reproducible(self, write_config, tmp_path):
        """Two runs with the same seed differ at most in wall_time."""
        path = write_config(SC_MIN_TEXT)
        cli.main(["run", path, "--out", str(tmp_path / "a")])
        cli.main(["run", path, "--out", str(tmp_path / "b")])
        first = pd.read_csv(tmp_path / "a" / "results.csv").drop(columns=["wall_time"])
        second = pd.read_csv(tmp_path / "b" / "results.csv").drop(columns=["wall_time"])

        pd.testing.assert_frame_equal(first, second)

    def test_seed_flag_overrides_config(self, write_config, tmp_path):
        out = tmp_path / "out"
        cli.main(["run", write_config(SC_MIN_TEXT), "--seed", "99", "--out", str(out)])

        assert "seed = 99" in (out / "config.txt").read_text(encoding="utf-8")

    def test_delta_too_large_is_config_error(self, write_config, tmp_path):
        path = write_config(SC_MIN_TEXT + "privacy.delta = 0.02\n")

        assert cli.main(["run", path, "--out", str(tmp_path / "out")]) == cli.EXIT_CONFIG_ERROR
        assert not (tmp_path / "out").exists()

    def test_missing_config_file(self, tmp_path):
        code = cli.main(["run", str(tmp_path / "absent.txt"), "--out", str(tmp_path)])

        assert code == cli.EXIT_CONFIG_ERROR

    def test_subcommand_kind_mismatch(self, write_config, tmp_path):
        code = cli.main(["sweep", write_config(SC_MIN_TEXT), "--out", str(tmp_path / "out")])

        assert code == cli.EXIT_CONFIG_ERROR

    def test_starved_solver_is_solver_failure(self, write_config, tmp_path):
        path = write_config(SC_MIN_TEXT + "solver.max_gradient_evals = 64\n")

        assert cli.main(["run", path, "--out", str(tmp_path / "out")]) == cli.EXIT_SOLVER_FAILURE

    def test_sweep(self, write_config, tmp_path):
        text = "kind = utility_sweep\nsweep.algorithm = sc_min\nsweep.ns = 16, 32\n"
        text += "sweep.repetitions = 2\n"
        out = tmp_path / "out"

        assert cli.main(["sweep", write_config(text), "--out", str(out)]) == cli.EXIT_OK
        assert len(pd.read_csv(out / "results.csv")) == 4
        assert len(pd.read_csv(out / "summary.csv")) == 2

    def test_sweep_with_every_run_failing(self, write_config, tmp_path):
        text = "kind = utility_sweep\nsweep.algorithm = sc_min\nsweep.ns = 32\n"
        text += "sweep.repetitions = 2\nsolver.max_gradient_evals = 32\n"
        out = tmp_path / "out"

        assert cli.main(["sweep", write_config(text), "--out", str(out)]) == cli.EXIT_SOLVER_FAILURE
        frame = pd.read_csv(out / "results.csv")
        assert set(frame["error"]) == {"PhaseFailedError"}

    def test_probe(self, write_config, tmp_path):
        text = "kind = stability_probe\nprobe.target = min\nprobe.ns = 10, 20\nprobe.trials = 4\n"
        out = tmp_path / "out"

        assert cli.main(["probe", write_config(text), "--out", str(out)]) == cli.EXIT_OK
        assert len(pd.read_csv(out / "probes.csv")) == 2

    def test_probe_violation_is_acceptance_failure(self, write_config, tmp_path, monkeypatch):
        def violated(family, n, trials, rng, reg_mu=None):
            return StabilityReport(n=n, trials=trials, max_shift=1.0, bound=0.1, violations=1)

        monkeypatch.setattr(experiment_router, "stability_probe_min", violated)
        text = "kind = stability_probe\nprobe.target = min\nprobe.ns = 10\nprobe.trials = 2\n"

        code = cli.main(["probe", write_config(text), "--out", str(tmp_path / "out")])

        assert code == cli.EXIT_ACCEPTANCE_FAILURE

    def test_no_noise_warns(self, write_config, tmp_path, caplog):
        out = tmp_path / "out"
        with caplog.at_level(logging.WARNING):
            code = cli.main(["run", write_config(SC_MIN_TEXT), "--no-noise", "--out", str(out)])

        assert code == cli.EXIT_OK
        assert "NOT differentially private" in caplog.text
        frame = pd.read_csv(out / "results.csv")
        assert not frame["private"].any()

    def test_output_dir_from_config(self, write_config, tmp_path):
        out = tmp_path / "from-config"
        path = write_config(SC_MIN_TEXT + f"output_dir = {out}\n")

        assert cli.main(["run", path]) == cli.EXIT_OK
        assert (out / "results.csv").exists()


class TestVerifyCommand:
    """Test cases for the verify subcommand's exit codes."""

    def test_all_rows_pass(self, monkeypatch, capsys):
        monkeypatch.setattr(
            cli, "run_acceptance_suite", lambda quick, seed: [AcceptanceRow("ledger", True, "ok")]
        )

        assert cli.main(["verify"]) == cli.EXIT_OK
        assert "1/1 checks passed" in capsys.readouterr().out

    def test_failed_row(self, monkeypatch):
        rows = [AcceptanceRow("ledger", True, "ok"), AcceptanceRow("schedule", False, "bad")]
        monkeypatch.setattr(cli, "run_acceptance_suite", lambda quick, seed: rows)

        assert cli.main(["verify", "--quick"]) == cli.EXIT_ACCEPTANCE_FAILURE
