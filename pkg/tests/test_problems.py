"""Tests for datasets, domains, problem constants and families."""

import numpy as np
import pytest

from dp_byoa.exceptions import ArgumentError, NotSupportedError
from dp_byoa.problems import (
    BallDomain,
    BilinearFamily,
    LogisticFamily,
    QuadraticFamily,
    SampleSet,
    block_bounds,
    empirical_grad,
    encode_bilinear_samples,
    load_samples,
    make_logistic_min_problem,
    make_quadratic_min_problem,
    partition_disjoint,
    probe_constants,
    save_samples,
)


class TestSampleSet:
    """Test cases for SampleSet."""

    @pytest.fixture
    def samples(self):
        """Five 2-D samples."""
        return SampleSet(np.arange(10, dtype=float).reshape(5, 2))

    def test_replace_changes_one_position(self, samples):
        """A neighbour differs from the original in exactly one row."""
        neighbour = samples.replace(2, np.array([-1.0, -1.0]))

        differing = np.any(neighbour.data != samples.data, axis=1)
        assert differing.tolist() == [False, False, True, False, False]
        assert neighbour.size == samples.size

    def test_block_keeps_original_indices(self, samples):
        """Blocks remember where their samples came from."""
        block = samples.block(1, 4)

        assert block.size == 3
        assert block.indices.tolist() == [1, 2, 3]

    def test_data_is_read_only(self, samples):
        """The sample array cannot be mutated in place."""
        with pytest.raises(ValueError):
            samples.data[0, 0] = 99.0

    def test_rejects_bad_shapes(self):
        """Empty or 3-D data is refused."""
        with pytest.raises(ArgumentError):
            SampleSet(np.zeros((0, 2)))
        with pytest.raises(ArgumentError):
            SampleSet(np.zeros((2, 2, 2)))

    def test_replace_checks_dimension(self, samples):
        """Replacement samples must have the set's dimension."""
        with pytest.raises(ArgumentError):
            samples.replace(0, np.zeros(3))

    def test_save_and_load(self, samples, tmp_path):
        """Samples survive a text file exactly."""
        path = tmp_path / "samples.txt"
        save_samples(samples, path)

        assert np.array_equal(load_samples(path).data, samples.data)


class TestBallDomain:
    """Test cases for BallDomain projection."""

    @pytest.fixture
    def domain(self):
        return BallDomain.centered(3, 2.0)

    def test_project_outside_point_lands_on_sphere(self, domain):
        """Points outside the ball are scaled back to the boundary."""
        point = domain.project(np.array([10.0, 0.0, 0.0]))

        assert np.allclose(point, [2.0, 0.0, 0.0])

    def test_project_is_idempotent(self, domain):
        """Projecting twice gives the same point."""
        rng = np.random.default_rng(0)
        for _ in range(50):
            once = domain.project(rng.normal(scale=5.0, size=3))
            assert np.array_equal(domain.project(once), once)

    def test_inside_point_unchanged(self, domain):
        point = np.array([0.5, -0.5, 0.1])

        assert np.array_equal(domain.project(point), point)
        assert domain.contains(point)

    def test_norm_bound_of_offset_ball(self):
        """The norm bound accounts for the center."""
        domain = BallDomain(np.array([3.0, 4.0]), 1.0)

        assert domain.norm_bound == pytest.approx(6.0)

    def test_rejects_non_positive_radius(self):
        with pytest.raises(ArgumentError):
            BallDomain.centered(2, 0.0)


class TestBlockBounds:
    """Test cases for disjoint block splitting."""

    def test_remainder_joins_last_block(self):
        """Blocks have floor(n/k) samples and the last one takes the rest."""
        assert block_bounds(10, 3) == [(0, 3), (3, 6), (6, 10)]

    def test_blocks_cover_dataset(self):
        bounds = block_bounds(100, 6)

        assert bounds[0][0] == 0
        assert bounds[-1][1] == 100
        assert all(stop == start for (_, stop), (start, _) in zip(bounds, bounds[1:]))

    def test_too_many_blocks(self):
        """More blocks than samples is refused."""
        with pytest.raises(ArgumentError):
            block_bounds(3, 4)

    def test_partition_disjoint_indices(self):
        """Partitions never share a sample."""
        samples = SampleSet(np.random.default_rng(1).normal(size=(17, 2)))
        parts = partition_disjoint(samples, 4)

        seen = np.concatenate([part.indices for part in parts])
        assert sorted(seen.tolist()) == list(range(17))


class TestQuadraticProblem:
    """Test cases for the quadratic family and its problems."""

    @pytest.fixture
    def family(self):
        return QuadraticFamily(dim=3, mu=1.0)

    def test_lipschitz_constant(self):
        """L = mu (D + R) for data of radius R over a ball of radius D."""
        samples = SampleSet(np.array([[0.5, 0.0], [0.0, 0.5]]))
        problem = make_quadratic_min_problem(samples, 2.0, BallDomain.centered(2, 1.0))

        assert problem.constants.lipschitz == pytest.approx(2.0 * (1.0 + 0.5))
        assert problem.constants.mu == pytest.approx(2.0)
        assert problem.constants.smoothness == pytest.approx(2.0)

    def test_gradient_vanishes_at_sample_mean(self, family):
        samples = family.sample(40, np.random.default_rng(3))
        problem = family.make_problem(samples)

        assert np.allclose(empirical_grad(problem, samples.mean()), 0.0, atol=1e-12)

    def test_certified_constants_hold(self, family):
        """Random probing finds no violation of L, smoothness or mu."""
        problem = family.make_problem(family.sample(30, np.random.default_rng(4)))
        report = probe_constants(problem, np.random.default_rng(5), pairs=300)

        assert report.ok

    def test_rejects_sample_outside_data_radius(self):
        samples = SampleSet(np.array([[3.0, 0.0]]))
        with pytest.raises(ArgumentError):
            make_quadratic_min_problem(
                samples, 1.0, BallDomain.centered(2, 1.0), data_radius=1.0
            )

    def test_population_excess_risk(self, family):
        """Zero at the population optimum and positive away from it."""
        optimum = family.population_optimum()

        assert family.population_excess_risk(optimum) == pytest.approx(0.0, abs=1e-15)
        assert family.population_excess_risk(optimum + 0.1) > 0.0

    def test_zero_spread_tiles_mean(self):
        family = QuadraticFamily(dim=2, spread=0.0)
        samples = family.sample(4, np.random.default_rng(0))

        assert np.allclose(samples.data, family.mean)


class TestLogisticProblem:
    """Test cases for the logistic family."""

    @pytest.fixture
    def family(self):
        return LogisticFamily(dim=3, ridge=0.1)

    def test_labels_must_be_signs(self):
        """The last column must hold +1/-1 labels."""
        data = np.array([[0.1, 0.2, 0.5], [0.3, 0.1, 1.0]])
        with pytest.raises(ArgumentError):
            make_logistic_min_problem(SampleSet(data), BallDomain.centered(2, 1.0))

    def test_certified_constants_hold(self, family):
        problem = family.make_problem(family.sample(30, np.random.default_rng(6)))
        report = probe_constants(problem, np.random.default_rng(7), pairs=300)

        assert report.ok
        assert problem.constants.mu == pytest.approx(0.1)

    def test_no_closed_form_optimum(self, family):
        """The logistic population optimum is only available by estimation."""
        with pytest.raises(NotSupportedError):
            family.population_optimum()


class TestBilinearProblem:
    """Test cases for the bilinear saddle family."""

    @pytest.fixture
    def family(self):
        return BilinearFamily.random(2, 3, np.random.default_rng(8), mu_x=0.5, mu_y=0.7)

    def test_dimensions(self, family):
        problem = family.make_problem(family.sample(12, np.random.default_rng(9)))

        assert problem.dim_x == 2
        assert problem.dim_y == 3
        assert problem.n == 12
        assert problem.constants.mu == pytest.approx(0.5)

    def test_certified_constants_hold(self, family):
        problem = family.make_problem(family.sample(20, np.random.default_rng(10)))
        report = probe_constants(problem, np.random.default_rng(11), pairs=300)

        assert report.ok

    def test_population_problem_is_single_mean_sample(self, family):
        problem = family.population_problem()

        assert problem.n == 1

    def test_encode_checks_shapes(self):
        """One offset row per matrix is required."""
        with pytest.raises(ArgumentError):
            encode_bilinear_samples(np.zeros((3, 2, 2)), np.zeros((2, 2)))
