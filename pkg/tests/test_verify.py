"""Tests for the acceptance suite."""

import pandas as pd
import pytest

from dp_byoa import verify
from dp_byoa.exceptions import ArgumentError
from dp_byoa.privacy import mechanisms
from dp_byoa.verify import AcceptanceRow, AcceptanceSuite, format_table


class TestAcceptanceSuite:
    """Test cases for individual acceptance rows."""

    @pytest.fixture
    def suite(self):
        """Create a quick suite."""
        return AcceptanceSuite(quick=True, seed=0)

    def test_row_names(self, suite):
        assert len(suite.rows) == 13
        assert list(suite.rows)[0] == "stability_min"
        assert "csc_routing" in suite.rows
        assert list(suite.rows)[-1] == "utility_trend"

    def test_noise_calibration_passes(self, suite):
        passed, detail = suite.check_noise_calibration()

        assert passed, detail

    def test_noise_calibration_catches_wrong_constant(self, suite, monkeypatch):
        """A miscalibrated sigma formula fails the row."""
        monkeypatch.setattr(mechanisms, "GAUSSIAN_LOG_NUMERATOR", 2.0)

        passed, _ = suite.check_noise_calibration()

        assert not passed

    def test_ledger(self, suite):
        passed, detail = suite.check_ledger()

        assert passed, detail
        assert "overlap rejected" in detail

    def test_schedule(self, suite):
        passed, detail = suite.check_schedule()

        assert passed, detail

    def test_utility_trend(self, suite):
        passed, detail = suite.check_utility_trend()

        assert passed, detail
        assert detail.startswith("excess population risk ~ n^-")

    def test_utility_trend_catches_growing_risk(self, suite, monkeypatch):
        """Risk that grows with n fails the row."""
        growing = pd.DataFrame(
            {"n": [64, 256, 1024], "excess_population_risk_mean": [0.1, 0.2, 0.4]}
        )
        monkeypatch.setattr(verify, "utility_sweep", lambda config: [])
        monkeypatch.setattr(verify, "aggregate_records", lambda records: growing)

        passed, detail = suite.check_utility_trend()

        assert not passed
        assert detail == "excess population risk ~ n^0.50"

    def test_run_records_errors_as_failures(self, suite):
        def broken():
            raise ArgumentError("no data")

        suite.rows = {"ledger_composition": suite.check_ledger, "broken": broken}
        rows = suite.run()

        assert [row.name for row in rows] == ["ledger_composition", "broken"]
        assert rows[0].passed
        assert not rows[1].passed
        assert rows[1].detail == "ArgumentError: no data"


class TestFormatTable:
    """Test cases for the verify table."""

    def test_format(self):
        rows = [
            AcceptanceRow("ledger_composition", True, "ok", 0.5),
            AcceptanceRow("csc_routing", False, "routed wrong", 1.25),
        ]
        lines = format_table(rows).splitlines()

        assert lines[0].startswith("check")
        assert "PASS" in lines[1]
        assert "FAIL" in lines[2] and "routed wrong" in lines[2]
        assert lines[-1] == "1/2 checks passed"
