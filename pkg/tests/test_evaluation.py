"""Tests for stability probes, risk estimates and utility sweeps."""

import numpy as np
import pytest
from pydantic import ValidationError

from dp_byoa.config import (
    ExperimentKind,
    FamilyKind,
    PrivacyConfig,
    ProblemConfig,
    RunConfig,
    SolverConfig,
    SweepConfig,
)
from dp_byoa.exceptions import ArgumentError, NotSupportedError
from dp_byoa.evaluation import (
    CSV_COLUMNS,
    UtilityRecord,
    aggregate_records,
    estimate_excess_risk,
    excess_empirical_risk,
    gap_sandwich_probe,
    loglog_slope,
    minimax_value,
    neighbor_shift_min,
    primal_gap_estimate,
    prox_nonexpansiveness_probe,
    records_frame,
    run_algorithm,
    stability_probe_min,
    stability_probe_minimax,
    utility_sweep,
    weak_gap_estimate,
)
from dp_byoa.oracle import exact_min_quadratic, exact_saddle_bilinear, primal_value_bilinear
from dp_byoa.problems import BilinearFamily, LogisticFamily, QuadraticFamily


def _config(kind, **problem):
    return RunConfig(kind=kind, problem=ProblemConfig(**problem))


class TestStabilityProbes:
    """Test cases for the empirical stability probes."""

    def test_min_probe_respects_bound(self):
        family = QuadraticFamily(dim=2, mu=1.0)
        report = stability_probe_min(family, 25, 30, np.random.default_rng(0))
        problem = family.make_problem(family.sample(25, np.random.default_rng(1)))

        assert report.ok
        assert report.bound == pytest.approx(2 * problem.constants.lipschitz / 25)
        assert len(report.shifts) == 30

    def test_min_probe_with_regularizer(self):
        """With reg_mu the bound uses only the regularizer's modulus."""
        family = QuadraticFamily(dim=2, mu=1.0)
        report = stability_probe_min(family, 25, 20, np.random.default_rng(2), reg_mu=0.5)
        problem = family.make_problem(family.sample(25, np.random.default_rng(3)))

        assert report.ok
        assert report.bound == pytest.approx(2 * problem.constants.lipschitz / (0.5 * 25))

    def test_shift_shrinks_with_n(self):
        """Neighbouring minimizers move by O(1/n)."""
        family = QuadraticFamily(dim=2, mu=1.0)
        small = stability_probe_min(family, 20, 30, np.random.default_rng(4))
        large = stability_probe_min(family, 200, 30, np.random.default_rng(4))

        assert np.mean(large.shifts) < np.mean(small.shifts)

    def test_neighbour_shift_of_identical_sets(self):
        family = QuadraticFamily(dim=2)
        samples = family.sample(10, np.random.default_rng(5))

        assert neighbor_shift_min(family, samples, samples) == 0.0

    def test_minimax_probe_respects_bound(self):
        family = BilinearFamily.random(2, 2, np.random.default_rng(6), mu_x=1.0, mu_y=0.5)
        report = stability_probe_minimax(family, 25, 15, np.random.default_rng(7))

        assert report.ok
        assert report.max_shift <= report.bound

    def test_minimax_probe_needs_modulus(self):
        """A convex-concave family needs reg_mu."""
        family = BilinearFamily.random(2, 2, np.random.default_rng(8), mu_x=0.0, mu_y=0.0)

        with pytest.raises(ArgumentError):
            stability_probe_minimax(family, 20, 3, np.random.default_rng(9))
        report = stability_probe_minimax(family, 20, 10, np.random.default_rng(9), reg_mu=0.3)
        assert report.ok

    def test_rejects_zero_trials(self):
        with pytest.raises(ArgumentError):
            stability_probe_min(QuadraticFamily(dim=2), 10, 0, np.random.default_rng(0))


class TestInequalityProbes:
    """Test cases for the prox and gap-sandwich probes."""

    @pytest.fixture
    def problem(self):
        family = BilinearFamily.random(2, 2, np.random.default_rng(10), mu_x=1.0, mu_y=1.0)
        return family.make_problem(family.sample(20, np.random.default_rng(11)))

    def test_prox_nonexpansive(self, problem):
        report = prox_nonexpansiveness_probe(problem, 30, np.random.default_rng(12), 0.7, 0.4)

        assert report.ok
        assert report.worst_margin <= 1e-9

    def test_prox_rejects_zero_modulus(self, problem):
        with pytest.raises(ArgumentError):
            prox_nonexpansiveness_probe(problem, 5, np.random.default_rng(0), 0.0, 1.0)

    def test_gap_sandwich(self, problem):
        lower, upper = gap_sandwich_probe(problem, 40, np.random.default_rng(13))

        assert lower.ok
        assert upper.ok
        assert lower.name == "gap_lower"

    def test_gap_sandwich_needs_strong_monotonicity(self):
        family = BilinearFamily.random(2, 2, np.random.default_rng(14), mu_x=0.0, mu_y=1.0)
        problem = family.make_problem(family.sample(10, np.random.default_rng(15)))

        with pytest.raises(ArgumentError):
            gap_sandwich_probe(problem, 5, np.random.default_rng(0))


class TestRiskEstimates:
    """Test cases for excess risk and gap estimates."""

    def test_excess_empirical_risk_quadratic(self):
        family = QuadraticFamily(dim=2)
        problem = family.make_problem(family.sample(30, np.random.default_rng(0)))
        x_star = exact_min_quadratic(problem).x

        assert excess_empirical_risk(problem, x_star) == pytest.approx(0.0, abs=1e-15)
        assert excess_empirical_risk(problem, x_star + 0.2) == pytest.approx(0.5 * 0.08)

    def test_excess_empirical_risk_logistic(self):
        """SLSQP finds a point no worse than a perturbed one."""
        family = LogisticFamily(dim=2, ridge=0.1)
        problem = family.make_problem(family.sample(40, np.random.default_rng(1)))

        assert excess_empirical_risk(problem, np.array([1.0, -1.0])) > 0.0
        assert excess_empirical_risk(problem, np.zeros(2)) >= 0.0

    def test_holdout_estimate_matches_closed_form(self):
        family = QuadraticFamily(dim=2)
        holdout = family.make_problem(family.sample(20_000, np.random.default_rng(2)))
        x = np.array([0.5, -0.3])
        estimate = estimate_excess_risk(family, x, holdout)

        exact = family.population_excess_risk(x)
        assert abs(estimate.value - exact) <= 5 * estimate.stderr + 1e-12
        assert not estimate.undersized

    def test_undersized_holdout_flagged(self):
        family = QuadraticFamily(dim=2)
        holdout = family.make_problem(family.sample(50, np.random.default_rng(3)))

        assert estimate_excess_risk(family, np.zeros(2), holdout, train_n=10).undersized
        assert not estimate_excess_risk(family, np.zeros(2), holdout, train_n=5).undersized

    def test_gaps_vanish_at_population_saddle(self):
        family = BilinearFamily.random(2, 2, np.random.default_rng(4), mu_x=1.0, mu_y=1.0)
        saddle = exact_saddle_bilinear(family.population_problem())

        assert abs(weak_gap_estimate(family, saddle.x, saddle.y)) <= 1e-10
        assert primal_gap_estimate(family, saddle.x) == pytest.approx(0.0, abs=1e-10)
        assert primal_gap_estimate(family, saddle.x + 0.3) > 0.0

    def test_primal_gap_when_convex_in_x(self):
        """With mu_x = 0 the minimax value comes from the primal function, not the saddle solve."""
        family = BilinearFamily.random(2, 2, np.random.default_rng(9), mu_x=0.0, mu_y=1.0)
        problem = family.population_problem()
        best = minimax_value(problem)

        axis = np.linspace(-2.0, 2.0, 161)
        grid = [np.array([a, b]) for a in axis for b in axis if a * a + b * b <= 4.0]
        grid_best = min(primal_value_bilinear(problem, x)[0] for x in grid)

        assert best <= grid_best + 1e-9
        assert best >= grid_best - 1e-2
        assert primal_gap_estimate(family, np.zeros(2)) >= 0.0
        assert primal_gap_estimate(family, np.array([1.5, -1.0])) > 0.0

    def test_gap_needs_saddle_family(self):
        with pytest.raises(NotSupportedError):
            weak_gap_estimate(QuadraticFamily(dim=2), np.zeros(2), np.zeros(2))


class TestRunAlgorithm:
    """Test cases for single evaluated runs."""

    def test_sc_min_record(self):
        outcome = run_algorithm(_config(ExperimentKind.SC_MIN, n=32), seed=3)
        record = outcome.record

        assert record.algorithm == "sc_min"
        assert record.family == "quadratic"
        assert record.solver == "svrg"
        assert record.n == 32
        assert record.delta == pytest.approx(1 / 64)
        assert record.seed == 3
        assert record.private
        assert record.excess_empirical_risk >= 0.0
        assert record.excess_population_risk >= 0.0
        assert record.empirical_gap is None
        assert record.noise_norm > 0.0

    def test_noise_monotone_in_epsilon(self):
        """With matched seeds only the noise scale changes with epsilon."""
        base = _config(ExperimentKind.SC_MIN, n=32)
        low = base.model_copy(update={"privacy": PrivacyConfig(epsilon=0.2)})
        high = base.model_copy(update={"privacy": PrivacyConfig(epsilon=0.8)})

        noisy = run_algorithm(low, seed=7).record.noise_norm
        quiet = run_algorithm(high, seed=7).record.noise_norm
        assert noisy == pytest.approx(4 * quiet, rel=1e-9)

    def test_logistic_holdout(self):
        config = _config(
            ExperimentKind.CONVEX_MIN_PHASED, family=FamilyKind.LOGISTIC, n=32, dim=2
        )
        record = run_algorithm(config, seed=0).record

        assert record.excess_population_risk >= 0.0
        assert record.holdout_undersized is False

    def test_cc_saddle_record(self):
        config = _config(
            ExperimentKind.CC_SADDLE, family=FamilyKind.BILINEAR, n=32, mu_x=0.0, mu_y=0.0
        )
        record = run_algorithm(config, seed=0).record

        assert record.solver == "extragradient"
        assert record.empirical_gap >= 0.0
        assert record.population_gap >= 0.0
        assert record.excess_empirical_risk is None

    def test_csc_saddle_record(self):
        config = _config(
            ExperimentKind.CSC_SADDLE, family=FamilyKind.BILINEAR, n=32, mu_x=0.0, mu_y=1.0
        )
        outcome = run_algorithm(config, seed=0)

        assert outcome.output.y is None
        assert outcome.record.empirical_gap >= 0.0
        assert outcome.record.population_gap >= 0.0

    def test_no_noise_record(self):
        config = _config(ExperimentKind.SC_MIN, n=32).model_copy(update={"no_noise": True})
        record = run_algorithm(config, seed=0).record

        assert not record.private
        assert record.noise_norm == 0.0


class TestUtilitySweep:
    """Test cases for sweeps and their aggregation."""

    @pytest.fixture
    def config(self):
        return RunConfig(
            kind=ExperimentKind.UTILITY_SWEEP,
            sweep=SweepConfig(algorithm=ExperimentKind.SC_MIN, ns=[16, 32], repetitions=2),
        )

    def test_grid_order_and_matched_seeds(self, config):
        records = utility_sweep(config)

        assert [(r.n, r.repetition) for r in records] == [(16, 0), (16, 1), (32, 0), (32, 1)]
        assert records[0].seed == records[2].seed
        assert records[0].seed != records[1].seed

    def test_failures_are_recorded(self, config):
        sweep = SweepConfig(algorithm=ExperimentKind.SC_MIN, ns=[32], repetitions=2)
        starved = config.model_copy(
            update={"solver": SolverConfig(max_gradient_evals=32), "sweep": sweep}
        )
        records = utility_sweep(starved)

        assert len(records) == 2
        assert {r.error for r in records} == {"PhaseFailedError"}
        assert all(r.excess_population_risk is None for r in records)
        assert aggregate_records(records).empty

    @pytest.mark.parametrize(
        "algorithm, family, metric",
        [
            (ExperimentKind.SC_MIN, FamilyKind.QUADRATIC, "excess_empirical_risk"),
            (ExperimentKind.SCSC_SADDLE, FamilyKind.BILINEAR, "empirical_gap"),
        ],
    )
    def test_halving_epsilon_never_helps(self, algorithm, family, metric):
        """At fixed n and matched seeds, the mean metric grows as epsilon halves."""
        config = RunConfig(
            kind=ExperimentKind.UTILITY_SWEEP,
            problem=ProblemConfig(family=family, n=512),
            sweep=SweepConfig(
                algorithm=algorithm, ns=[512], epsilons=[1.0, 0.5, 0.25], repetitions=3
            ),
        )
        records = utility_sweep(config)
        assert all(r.error is None for r in records)

        summary = aggregate_records(records).sort_values("epsilon", ascending=False)
        means = list(summary[f"{metric}_mean"])
        assert len(means) == 3
        assert means[0] <= means[1] <= means[2]
        noise = list(summary["noise_norm_mean"])
        assert noise[1] == pytest.approx(2 * noise[0], rel=1e-9)

    def test_parallel_matches_serial(self, config):
        serial = records_frame(utility_sweep(config)).drop(columns=["wall_time"])
        parallel = records_frame(utility_sweep(config, jobs=2)).drop(columns=["wall_time"])

        assert serial.equals(parallel)

    def test_aggregate(self, config):
        summary = aggregate_records(utility_sweep(config))

        assert list(summary["n"]) == [16, 32]
        assert list(summary["runs"]) == [2, 2]
        assert summary["stderr_defined"].all()
        assert "excess_population_risk_mean" in summary.columns
        assert "excess_population_risk_stderr" in summary.columns

    def test_single_repetition_has_no_stderr(self, config):
        summary = aggregate_records(utility_sweep(config, repetitions=1))

        assert not summary["stderr_defined"].any()
        assert summary["excess_population_risk_stderr"].isna().all()

    def test_rejects_non_sweep_config(self):
        with pytest.raises(ArgumentError):
            utility_sweep(_config(ExperimentKind.SC_MIN))

    def test_csv_column_order(self, config):
        frame = records_frame(utility_sweep(config, repetitions=1))

        assert list(frame.columns) == CSV_COLUMNS
        assert CSV_COLUMNS[:3] == ["algorithm", "family", "solver"]


class TestRecordsAndSlopes:
    """Test cases for record validation and trend fitting."""

    def test_negative_metric_rejected(self):
        with pytest.raises(ValidationError):
            UtilityRecord(
                algorithm="sc_min",
                family="quadratic",
                solver="svrg",
                n=10,
                dim=2,
                epsilon=0.5,
                delta=0.01,
                seed=0,
                excess_empirical_risk=-0.1,
            )

    def test_loglog_slope(self):
        ns = [64, 128, 256, 512]

        assert loglog_slope(ns, [n**-0.5 for n in ns]) == pytest.approx(-0.5)
        assert loglog_slope(ns, [3.0 / n for n in ns]) == pytest.approx(-1.0)

    def test_loglog_slope_rejects_bad_input(self):
        with pytest.raises(ArgumentError):
            loglog_slope([10], [1.0])
        with pytest.raises(ArgumentError):
            loglog_slope([10, 20], [1.0, 0.0])
