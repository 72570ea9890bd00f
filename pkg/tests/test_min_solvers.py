"""Tests for the finite-sum minimization solvers."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from dp_byoa.exceptions import ArgumentError, BudgetExceededError
from dp_byoa.oracle import exact_min_quadratic
from dp_byoa.problems import LogisticFamily, QuadraticFamily
from dp_byoa.solvers import (
    MinRegularizer,
    MinSolverKind,
    MinSolverSpec,
    iteration_budget_min,
    solve_min,
    strongly_convex_gap_bound,
)


class TestSolveMin:
    """Test cases for solve_min on problems with known minimizers."""

    @pytest.fixture
    def family(self):
        return QuadraticFamily(dim=3, mu=1.0)

    @pytest.fixture
    def problem(self, family):
        return family.make_problem(family.sample(32, np.random.default_rng(0)))

    @pytest.mark.parametrize("kind", list(MinSolverKind))
    def test_reaches_target(self, problem, kind):
        """Every solver certifies its target and the true suboptimality agrees."""
        exact = exact_min_quadratic(problem)
        spec = MinSolverSpec(kind=kind, target=1e-9, seed=3)
        result = solve_min(problem, spec, reference=exact.x)

        assert result.certificate <= 1e-9
        assert result.achieved <= 1e-9 + 1e-12
        assert result.gradient_evals >= problem.n

    @pytest.mark.parametrize("kind", list(MinSolverKind))
    def test_regularized_matches_oracle(self, problem, kind):
        """With an anchor regularizer the solver finds the regularized minimizer."""
        regularizer = MinRegularizer(2.0, np.array([1.0, -1.0, 0.5]))
        exact = exact_min_quadratic(problem, regularizer)
        result = solve_min(problem, MinSolverSpec(kind=kind, target=1e-10), regularizer)

        # (mu_eff/2)||x - x*||^2 <= suboptimality <= target
        assert np.linalg.norm(result.point - exact.x) <= math.sqrt(2e-10 / 3.0) + 1e-9

    def test_same_seed_same_point(self, problem):
        spec = MinSolverSpec(kind=MinSolverKind.SVRG, target=1e-6, seed=11)

        assert np.array_equal(solve_min(problem, spec).point, solve_min(problem, spec).point)

    def test_history_records_every_epoch(self, problem):
        spec = MinSolverSpec(target=1e-9, record_history=True)
        result = solve_min(problem, spec)

        assert len(result.history) == result.epochs + 1

    def test_budget_exceeded_carries_best_point(self, problem):
        """A cap that allows no epoch fails with the starting point as the best point."""
        spec = MinSolverSpec(target=1e-12, max_gradient_evals=problem.n + 1)

        with pytest.raises(BudgetExceededError) as info:
            solve_min(problem, spec)
        assert info.value.best_point.shape == (3,)
        assert info.value.gradient_evals == problem.n
        assert info.value.best_certificate > 1e-12

    def test_cap_below_one_pass(self, problem):
        with pytest.raises(ArgumentError):
            solve_min(problem, MinSolverSpec(max_gradient_evals=problem.n - 1))

    def test_requires_strong_convexity(self):
        """A plain logistic loss needs a regularizer."""
        family = LogisticFamily(dim=2, ridge=0.0)
        problem = family.make_problem(family.sample(20, np.random.default_rng(1)))

        with pytest.raises(ArgumentError):
            solve_min(problem, MinSolverSpec())

        regularizer = MinRegularizer(0.5, np.zeros(2))
        result = solve_min(problem, MinSolverSpec(target=1e-8), regularizer)
        assert result.certificate <= 1e-8


class TestMinSolverSpec:
    """Test cases for spec validation."""

    def test_rejects_non_positive_target(self):
        with pytest.raises(ValidationError):
            MinSolverSpec(target=0.0)

    def test_is_frozen(self):
        spec = MinSolverSpec()
        with pytest.raises(ValidationError):
            spec.target = 1.0

    def test_regularizer_rejects_negative_modulus(self):
        with pytest.raises(ArgumentError):
            MinRegularizer(-1.0, np.zeros(2))


class TestBudgets:
    """Test cases for the theoretical gradient budgets."""

    def test_budget_formula(self):
        """c (n + kappa) ceil(log(gap0/gamma)) with c = 3 for SVRG."""
        budget = iteration_budget_min(MinSolverKind.SVRG, 100, 4.0, 1e-6, 1.0)

        assert budget == 3 * 104 * 14

    def test_budget_constant_override(self):
        budget = iteration_budget_min(MinSolverKind.SARAH, 10, 1.0, 0.1, 1.0, constant=1.0)

        assert budget == 11 * 3

    def test_no_budget_when_already_accurate(self):
        assert iteration_budget_min(MinSolverKind.SGD, 10, 2.0, 1e-3, 1e-4) == 0

    def test_kappa_below_one(self):
        with pytest.raises(ArgumentError):
            iteration_budget_min(MinSolverKind.SGD, 10, 0.5, 1e-3, 1.0)


class TestGapBound:
    """Test cases for the oracle-free suboptimality certificate."""

    def test_bounds_true_suboptimality(self):
        family = QuadraticFamily(dim=2, mu=1.0)
        problem = family.make_problem(family.sample(10, np.random.default_rng(2)))
        x_star = exact_min_quadratic(problem).x
        mean = problem.samples.mean()

        for x in (np.array([1.0, 1.0]), np.array([-0.5, 0.2]), x_star):
            grad = x - mean
            gap = 0.5 * float(np.sum((x - mean) ** 2)) - 0.5 * float(np.sum((x_star - mean) ** 2))
            bound = strongly_convex_gap_bound(problem.domain, x, grad, 1.0)
            assert bound >= gap - 1e-12

    def test_zero_at_minimizer(self):
        family = QuadraticFamily(dim=2, mu=1.0)
        problem = family.make_problem(family.sample(10, np.random.default_rng(2)))
        x_star = exact_min_quadratic(problem).x

        gradient = x_star - problem.samples.mean()
        bound = strongly_convex_gap_bound(problem.domain, x_star, gradient, 1.0)
        assert bound == pytest.approx(0.0, abs=1e-14)
