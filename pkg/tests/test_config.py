"""Tests for experiment config parsing and process settings."""

import pytest
from pydantic import ValidationError

from dp_byoa.config import (
    DpByoaSettings,
    ExperimentKind,
    FamilyKind,
    ProbeTarget,
    dump_config,
    load_config,
    parse_config_text,
)
from dp_byoa.exceptions import ConfigError
from dp_byoa.solvers import MinimaxSolverKind, MinSolverKind


SC_MIN_TEXT = """\
# strongly convex quadratic
kind = sc_min
seed = 7
problem.family = quadratic
problem.n = 64
privacy.epsilon = 0.5
"""


class TestParseConfig:
    """Test cases for the key = value format."""

    def test_parse_basic(self):
        config = parse_config_text(SC_MIN_TEXT)

        assert config.kind == ExperimentKind.SC_MIN
        assert config.seed == 7
        assert config.problem.n == 64
        assert config.problem.family == FamilyKind.QUADRATIC
        assert config.privacy.delta is None
        assert config.privacy.budget(64).delta == pytest.approx(1 / 128)

    def test_parse_lists(self):
        text = (
            "kind = utility_sweep\n"
            "sweep.algorithm = convex_min_phased\n"
            "sweep.ns = 64, 128, 256\n"
            "sweep.epsilons = 0.25,0.5\n"
            "sweep.repetitions = 3\n"
        )
        config = parse_config_text(text)

        assert config.sweep.ns == [64, 128, 256]
        assert config.sweep.epsilons == [0.25, 0.5]
        assert config.sweep.algorithm == ExperimentKind.CONVEX_MIN_PHASED

    def test_parse_solver_choice(self):
        text = (
            "kind = scsc_saddle\n"
            "problem.family = bilinear\n"
            "solver.min_kind = sarah\n"
            "solver.minimax_kind = svrg_minimax\n"
        )
        config = parse_config_text(text)

        assert config.solver.min_kind == MinSolverKind.SARAH
        assert config.solver.minimax_spec().kind == MinimaxSolverKind.SVRG_MINIMAX

    def test_parse_probe(self):
        text = "kind = stability_probe\nproblem.family = bilinear\nprobe.target = prox\n"
        config = parse_config_text(text)

        assert config.probe.target == ProbeTarget.PROX
        assert config.probe.ns == [25, 50, 100]

    def test_unknown_key_reports_line(self):
        text = SC_MIN_TEXT + "problem.bogus = 1\n"

        with pytest.raises(ConfigError) as info:
            parse_config_text(text)
        assert info.value.line == 7
        assert info.value.field == "problem.bogus"

    def test_unknown_section(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("kind = sc_min\nmodel.n = 3\n")
        assert info.value.line == 2

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("kind = sc_min\nseed = 1\nseed = 2\n")
        assert info.value.line == 3

    def test_missing_equals(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("kind = sc_min\nseed 1\n")
        assert info.value.line == 2

    def test_bad_value(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("kind = sc_min\nproblem.n = many\n")
        assert info.value.field == "problem.n"
        assert info.value.line == 2

    def test_missing_kind(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("seed = 1\n")
        assert info.value.field == "kind"

    def test_delta_at_least_one_over_n(self):
        """delta >= 1/n is a config error naming privacy.delta."""
        text = SC_MIN_TEXT + "privacy.delta = 0.02\n"

        with pytest.raises(ConfigError, match="1/n") as info:
            parse_config_text(text)
        assert info.value.field == "privacy.delta"
        assert info.value.line == 7

    def test_delta_checked_for_every_sweep_n(self):
        text = (
            "kind = utility_sweep\n"
            "sweep.algorithm = sc_min\n"
            "sweep.ns = 16, 1000\n"
            "privacy.delta = 0.01\n"
        )

        with pytest.raises(ConfigError) as info:
            parse_config_text(text)
        assert info.value.field == "privacy.delta"

    def test_epsilon_above_one(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("kind = sc_min\nprivacy.epsilon = 2.0\n")
        assert info.value.field == "privacy.epsilon"

    def test_family_mismatch(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("kind = cc_saddle\nproblem.family = quadratic\n")
        assert info.value.field == "problem.family"
        assert info.value.line == 2

    def test_sc_min_needs_ridge_for_logistic(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("kind = sc_min\nproblem.family = logistic\n")
        assert info.value.field == "problem.ridge"

    def test_probe_family_mismatch(self):
        with pytest.raises(ConfigError):
            parse_config_text("kind = stability_probe\nprobe.target = gap_sandwich\n")

    def test_config_is_frozen(self):
        config = parse_config_text(SC_MIN_TEXT)

        with pytest.raises(ValidationError):
            config.seed = 3


class TestDumpConfig:
    """Test cases for writing configs back out."""

    @pytest.mark.parametrize(
        "text",
        [
            SC_MIN_TEXT,
            "kind = utility_sweep\nsweep.ns = 32, 64\nsweep.epsilons = 0.1, 0.3\nmu = 0.25\n",
            "kind = csc_saddle\nproblem.family = bilinear\nproblem.mu_x = 0.0\nno_noise = true\n",
        ],
    )
    def test_dump_reparses_to_same_config(self, text):
        config = parse_config_text(text)

        assert parse_config_text(dump_config(config)) == config

    def test_dump_lists_every_section(self):
        dumped = dump_config(parse_config_text(SC_MIN_TEXT))

        for key in ("kind = sc_min", "seed = 7", "problem.n = 64", "privacy.epsilon = 0.5"):
            assert key in dumped
        assert "privacy.delta" not in dumped


class TestLoadConfig:
    """Test cases for reading config files."""

    def test_load(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text(SC_MIN_TEXT, encoding="utf-8")

        assert load_config(path).kind == ExperimentKind.SC_MIN

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.txt")


class TestSettings:
    """Test cases for environment settings."""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("DP_BYOA_JOBS", raising=False)
        settings = DpByoaSettings(_env_file=None)

        assert settings.jobs == 1
        assert settings.log_level == "INFO"
        assert settings.output_dir == "runs"

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("DP_BYOA_JOBS", "3")
        monkeypatch.setenv("DP_BYOA_QUICK", "true")
        settings = DpByoaSettings(_env_file=None)

        assert settings.jobs == 3
        assert settings.quick
